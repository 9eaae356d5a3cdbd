use cstar_descent::coalgebra::Coalgebra;
use cstar_descent::comodule::{cb_audit, roundtrip_comodule, roundtrip_module, Comodule};
use cstar_descent::connection::{comodule_to_connection, descend_via_connection, Omega};
use cstar_descent::gallery::{self, Instance, Source};
use cstar_descent::instance::{self, matrix_data, InstanceFile, PairRef, Resolved};
use cstar_descent::linalg::{self, Tolerance};
use cstar_descent::module::HilbertModule;
use cstar_descent::{Error, Kind, Report, Result};
use rand::SeedableRng;
use std::collections::BTreeMap;
use std::sync::Arc;

pub struct Options {
    pub tol: Option<Tolerance>,
    pub levels: usize,
}

fn pair_label(p: &PairRef) -> String {
    match p {
        PairRef::Correspondence(n) => format!("correspondence:{n}"),
        PairRef::Inclusion(n) => format!("inclusion:{n}"),
    }
}

fn oracle_check(report: &mut Report, name: &str, computed: usize, expected: usize) {
    let mut c = cstar_descent::Checks::new();
    c.record(
        name,
        format!("computed dimension {computed} equals the enumerative count {expected}"),
        (computed as f64 - expected as f64).abs(),
        0.0,
        Kind::ImageMismatch,
    );
    report.add_checks("", &c);
}

/// Builds every referenced coalgebra and records its dimensions.
fn coalgebras(
    res: &Resolved<f64>,
    report: &mut Report,
) -> Result<BTreeMap<PairRef, Arc<Coalgebra<f64>>>> {
    let cos = res.coalgebras()?;
    for (p, co) in &cos {
        let label = pair_label(p);
        report.fact(format!("{label}.dim_k"), co.pair.k.dim());
        report.fact(format!("{label}.dim_c"), co.dim());
    }
    Ok(cos)
}

fn omega_for(res: &Resolved<f64>, name: &str, co: Arc<Coalgebra<f64>>, report: &mut Report) -> Result<Omega<f64>> {
    let inc = res
        .inclusions
        .get(name)
        .ok_or_else(|| Error::new(Kind::UnresolvedReference, format!("no inclusion named '{name}'")))?;
    let om = Omega::new(inc, co)?;
    report.fact(format!("inclusion:{name}.dim_omega"), om.dim());
    Ok(om)
}

pub fn check(file: InstanceFile, opts: &Options, report: &mut Report) -> Result<()> {
    let res = Resolved::<f64>::new(file, opts.tol)?;
    for (n, a) in &res.algebras {
        report.add_checks(&format!("algebra:{n}"), a.checks());
        report.fact(format!("algebra:{n}.dim"), a.dim());
    }
    for (n, i) in &res.inclusions {
        report.add_checks(&format!("inclusion:{n}"), i.checks());
    }
    for (n, m) in &res.modules {
        report.add_checks(&format!("module:{n}"), m.checks());
        report.fact(format!("module:{n}.dim"), m.dim());
    }
    for (n, f) in &res.correspondences {
        report.add_checks(&format!("correspondence:{n}"), f.checks());
        report.fact(format!("correspondence:{n}.faithful"), f.faithful);
    }
    Ok(())
}

pub fn coalgebra(file: InstanceFile, opts: &Options, report: &mut Report) -> Result<()> {
    let res = Resolved::<f64>::new(file, opts.tol)?;
    let mut pairs: Vec<PairRef> = res.inclusions.keys().map(|n| PairRef::Inclusion(n.clone())).collect();
    pairs.extend(res.correspondences.keys().map(|n| PairRef::Correspondence(n.clone())));
    for p in pairs {
        let label = pair_label(&p);
        let co = res.coalgebra(&p)?;
        report.add_checks(&label, co.pair.checks());
        report.add_checks(&label, co.checks());
        report.fact(format!("{label}.dim_k"), co.pair.k.dim());
        report.fact(format!("{label}.dim_c"), co.dim());
        report.fact(format!("{label}.dim_cc"), co.cc.dim());
        if let PairRef::Inclusion(n) = &p {
            let om = omega_for(&res, n, co.clone(), report)?;
            report.add_checks(&label, &om.checks);
        }
    }
    Ok(())
}

fn comodules(
    res: &Resolved<f64>,
    cos: &BTreeMap<PairRef, Arc<Coalgebra<f64>>>,
) -> Result<Vec<(String, Comodule<f64>, Arc<Coalgebra<f64>>)>> {
    res.file
        .comodules
        .iter()
        .map(|c| {
            let co = cos[&c.over].clone();
            Ok((c.name.clone(), res.comodule(c, &co)?, co))
        })
        .collect()
}

pub fn comodule_verify(file: InstanceFile, opts: &Options, report: &mut Report) -> Result<()> {
    let res = Resolved::<f64>::new(file, opts.tol)?;
    let cos = coalgebras(&res, report)?;
    for (p, co) in &cos {
        if let PairRef::Inclusion(n) = p {
            omega_for(&res, n, co.clone(), report)?;
        }
    }
    for (name, z, _) in comodules(&res, &cos)? {
        report.add_checks(&format!("comodule:{name}"), &z.checks);
        report.fact(format!("comodule:{name}.dim"), z.dim());
    }
    Ok(())
}

fn describe_module(report: &mut Report, key: &str, x: &HilbertModule<f64>) {
    report.fact(format!("{key}.dim"), x.dim());
    if x.algebra().is_point_basis() {
        report.fact(format!("{key}.fiber_dims"), gallery::fiber_dims(x));
    }
    let gram: Vec<_> = x.gram().iter().map(matrix_data).collect();
    report.fact(format!("{key}.gram"), gram);
}

pub fn descend(file: InstanceFile, opts: &Options, report: &mut Report) -> Result<()> {
    let res = Resolved::<f64>::new(file, opts.tol)?;
    let cos = coalgebras(&res, report)?;
    for (name, z, co) in comodules(&res, &cos)? {
        let key = format!("comodule:{name}");
        report.add_checks(&key, &z.checks);
        z.checks.ensure()?;
        let d = roundtrip_comodule(&z, &co)?;
        report.add_checks(&key, &d.cotensor.checks);
        report.add_checks(&key, &d.checks);
        describe_module(report, &format!("{key}.descended"), &d.cotensor.module);
        report.fact(format!("{key}.witness"), matrix_data(&d.unitary));
    }
    Ok(())
}

pub fn roundtrip(file: InstanceFile, opts: &Options, report: &mut Report) -> Result<()> {
    let res = Resolved::<f64>::new(file, opts.tol)?;
    let mut pairs: Vec<(PairRef, String)> = res
        .file
        .inclusions
        .iter()
        .map(|i| (PairRef::Inclusion(i.name.clone()), i.sub.clone()))
        .collect();
    pairs.extend(
        res.file
            .correspondences
            .iter()
            .map(|c| (PairRef::Correspondence(c.name.clone()), c.left_algebra.clone())),
    );
    for (p, sub) in pairs {
        let co = res.coalgebra(&p)?;
        for m in res.file.modules.iter().filter(|m| m.algebra == sub) {
            let rt = roundtrip_module(&res.modules[&m.name], &co)?;
            let key = format!("{}/module:{}", pair_label(&p), m.name);
            report.add_checks(&key, &rt.cotensor.checks);
            report.add_checks(&key, &rt.checks);
        }
    }
    let cos = res.coalgebras()?;
    for (name, z, co) in comodules(&res, &cos)? {
        let key = format!("comodule:{name}");
        z.checks.ensure()?;
        let d = roundtrip_comodule(&z, &co)?;
        report.add_checks(&key, &d.checks);
    }
    Ok(())
}

pub fn connection_verify(file: InstanceFile, opts: &Options, report: &mut Report) -> Result<()> {
    let res = Resolved::<f64>::new(file, opts.tol)?;
    let cos = coalgebras(&res, report)?;
    let mut omegas = BTreeMap::new();
    for (p, co) in &cos {
        if let PairRef::Inclusion(n) = p {
            omegas.insert(n.clone(), omega_for(&res, n, co.clone(), report)?);
        }
    }
    for c in &res.file.connections {
        let om = &omegas[&c.inclusion];
        let (conn, _) = res.connection(c, om)?;
        let key = format!("connection:{}", c.name);
        report.add_checks(&key, &conn.checks);
        report.fact(format!("{key}.curvature_norm"), conn.curvature_norm);
        report.fact(format!("{key}.flat"), conn.flat);
        report.fact(format!("{key}.hermitian"), conn.hermitian);
    }
    // Comodules over inclusions also define connections.
    for (name, z, _) in comodules(&res, &cos)? {
        let over = &res.file.comodules.iter().find(|c| c.name == name).expect("listed").over;
        if let PairRef::Inclusion(n) = over {
            z.checks.ensure()?;
            let (conn, _) = comodule_to_connection(&z, &omegas[n])?;
            let key = format!("comodule:{name}.connection");
            report.add_checks(&key, &conn.checks);
            report.fact(format!("{key}.curvature_norm"), conn.curvature_norm);
        }
    }
    Ok(())
}

pub fn connection_descend(file: InstanceFile, opts: &Options, report: &mut Report) -> Result<()> {
    let res = Resolved::<f64>::new(file, opts.tol)?;
    let cos = coalgebras(&res, report)?;
    for c in &res.file.connections {
        let co = cos[&PairRef::Inclusion(c.inclusion.clone())].clone();
        let om = omega_for(&res, &c.inclusion, co, report)?;
        let (conn, _) = res.connection(c, &om)?;
        let key = format!("connection:{}", c.name);
        report.add_checks(&key, &conn.checks);
        conn.checks.ensure()?;
        let d = descend_via_connection(&conn, &om, &res.inclusions[&c.inclusion])?;
        report.add_checks(&key, &d.checks);
        describe_module(report, &format!("{key}.kernel"), &d.module);
        report.fact(format!("{key}.witness"), matrix_data(&d.witness));
    }
    Ok(())
}

pub fn audit(file: InstanceFile, opts: &Options, report: &mut Report) -> Result<()> {
    let res = Resolved::<f64>::new(file, opts.tol)?;
    let cos = coalgebras(&res, report)?;
    let tol = res.tol;
    for (name, z, co) in comodules(&res, &cos)? {
        let key = format!("comodule:{name}");
        z.checks.ensure()?;
        let d = roundtrip_comodule(&z, &co)?;
        let norms = cb_audit(&z.module, &d.yf.module, &d.unitary, opts.levels, tol)?;
        let composite = z.counit(&co) * &z.coaction;
        let counit_norms = cb_audit(&z.module, &z.module, &composite, opts.levels, tol)?;
        let mut checks = cstar_descent::Checks::new();
        for (label, what, ns) in [("cb-norm", "δ_Z", &norms), ("cb-norm-counit", "ε_Z∘δ_Z", &counit_norms)] {
            for (k, n) in ns.iter().enumerate() {
                checks.record(
                    format!("{label}-level-{}", k + 1),
                    format!("‖id ⊗ {what}‖ at matrix level {} is at most 1 (excess over 1)", k + 1),
                    (n - 1.0).max(0.0),
                    tol.threshold(1.0),
                    Kind::NotIsometric,
                );
            }
        }
        report.add_checks(&key, &checks);
        report.fact(format!("{key}.cb_norms"), norms);
        report.fact(format!("{key}.cb_norms_counit"), counit_norms);
    }
    Ok(())
}

/// Gallery generator names, with `group` resolved by `--order`.
pub fn gallery_source(name: &str, order: Option<usize>) -> Result<(String, Source)> {
    if name == "group" {
        let n = order.ok_or_else(|| Error::new(Kind::InvalidArgument, "`gallery group` needs --order"))?;
        if n == 0 {
            return Err(Error::new(Kind::InvalidArgument, "group order must be positive"));
        }
        let g = gallery::FiniteGroup::cyclic(n);
        return Ok((format!("group-z{n}"), Source::Group(g)));
    }
    let name = if name == "covering" { "covering-3-2" } else { name };
    gallery::standard_sources()
        .into_iter()
        .find(|(n, _)| n == name)
        .ok_or_else(|| {
            let known: Vec<String> = gallery::standard_sources().into_iter().map(|(n, _)| n).collect();
            Error::new(
                Kind::InvalidArgument,
                format!("unknown gallery instance '{name}'; known: group, covering, {}", known.join(", ")),
            )
        })
}

/// Runs a generator end to end; with `emit`, also returns the instance file.
pub fn gallery_run(
    name: &str,
    order: Option<usize>,
    opts: &Options,
    report: &mut Report,
    emit: bool,
) -> Result<Option<InstanceFile>> {
    let (label, source) = gallery_source(name, order)?;
    let tol = opts.tol.unwrap_or_else(Tolerance::default_for::<f64>);
    let inst = Instance::<f64>::build(label.clone(), source, tol)?;
    report.instance = label;
    report.add_checks("correspondence", inst.correspondence.checks());
    let co = inst.coalgebra()?;
    report.add_checks("pair", co.pair.checks());
    report.add_checks("coalgebra", co.checks());
    report.fact("dim_k", co.pair.k.dim());
    report.fact("dim_c", co.dim());
    report.fact("oracle_dim_c", inst.oracle.dim_c);
    oracle_check(report, "oracle-dim-c", co.dim(), inst.oracle.dim_c);

    if inst.correspondence.faithful {
        let u = co.pair.unit_image_subspace()?;
        let eq = linalg::subspace_equal(&u, &co.pair.eta_image(), tol)?;
        let d = linalg::subspace_distance(&u, &co.pair.eta_image())?;
        let mut c = cstar_descent::Checks::new();
        c.record(
            "unit-image-characterization",
            "{k ∈ K : the A-module conditions hold} equals η(A)",
            if eq { d } else { d.max(1.0) },
            tol.threshold(1.0),
            Kind::CharacterizationMismatch,
        );
        report.add_checks("", &c);
    }
    if let Source::Group(g) = &inst.source {
        let f = gallery::fourier(g, &co)?;
        report.add_checks("fourier", &f.checks);
    }
    let omega = match inst.omega(co.clone()) {
        Some(om) => {
            let om = om?;
            report.add_checks("omega", &om.checks);
            report.fact("dim_omega", om.dim());
            if let Some(o) = inst.oracle.dim_omega {
                report.fact("oracle_dim_omega", o);
                oracle_check(report, "oracle-dim-omega", om.dim(), o);
            }
            Some(om)
        }
        None => None,
    };

    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut modules = inst.standard_modules()?;
    if let Source::Covering(c) = &inst.source {
        if let Some(dims) = c.base_dims() {
            let x = gallery::bundle(inst.sub().clone(), &dims, tol)?;
            modules.insert(0, ("bundle".into(), x));
        }
    }
    let mut emitted = Vec::new();
    for (mname, x) in &modules {
        let key = format!("module:{mname}");
        let rt = roundtrip_module(x, &co)?;
        report.add_checks(&key, &rt.comparison.comodule.checks);
        report.add_checks(&key, &rt.cotensor.checks);
        report.add_checks(&key, &rt.checks);
        let z = &rt.comparison.comodule;
        let d = roundtrip_comodule(z, &co)?;
        report.add_checks(&key, &d.checks);
        if x.algebra().is_point_basis() {
            report.fact(format!("{key}.fiber_dims"), gallery::fiber_dims(x));
            report.fact(format!("{key}.descended_fiber_dims"), gallery::fiber_dims(&d.cotensor.module));
        }
        let sub = gallery::random_submodule(x, &mut rng);
        let (ok, dist) = cstar_descent::tensor::exactness_check(
            &x.as_bimodule(),
            &sub,
            &inst.correspondence.bimodule(),
            tol,
        )?;
        let mut c = cstar_descent::Checks::new();
        c.record(
            "exactness",
            "image(i ⊗ id) = ker(q ⊗ id) for a random submodule",
            if ok { dist } else { dist.max(1.0) },
            tol.threshold(1.0),
            Kind::ImageMismatch,
        );
        report.add_checks(&key, &c);
        if let Some(om) = &omega {
            let (conn, _) = comodule_to_connection(z, om)?;
            report.add_checks(&format!("{key}.connection"), &conn.checks);
            let dv = descend_via_connection(&conn, om, inst.inclusion.as_ref().expect("inclusion"))?;
            report.add_checks(&format!("{key}.connection"), &dv.checks);
        }
        if emit && emitted.is_empty() {
            emitted.push(rt.comparison.comodule.clone());
        }
    }
    if emit {
        let zs: Vec<(&str, &Comodule<f64>)> = emitted.iter().map(|z| ("Z", z)).collect();
        return Ok(Some(instance::from_gallery(&inst, &zs, Some(&co))?));
    }
    Ok(None)
}
