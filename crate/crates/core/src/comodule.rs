//! Hermitian comodules over `C`, the comparison functor, the cotensor product and the
//! two round-trip isomorphisms.

use crate::coalgebra::Coalgebra;
use crate::error::{shape, Error, Kind, Result};
use crate::linalg::{self, kron_apply, max_abs, Tolerance};
use crate::module::{combine, HilbertModule};
use crate::pair::relation_residual;
use crate::report::Checks;
use crate::scalar::{CMat, Real};
use crate::tensor::{balanced_tensor, interior_tensor, Interior, Tensor};

/// A Hilbert `B`-module `Z` with a coaction `δ_Z: Z → Z ⊗_B C`.
#[derive(Clone, Debug)]
pub struct Comodule<T: Real> {
    pub module: HilbertModule<T>,
    pub zc: Tensor<T>,
    /// `δ_Z` in quotient coordinates of `Z ⊗_B C`.
    pub coaction: CMat<T>,
    pub hermitian_checked: bool,
    pub checks: Checks,
}

impl<T: Real> Comodule<T> {
    /// Evaluates every comodule axiom without failing on a violated one; the verdicts
    /// are in `checks`, in the order B-linearity, counit, coassociativity, Hermitian.
    pub fn assess(
        module: HilbertModule<T>,
        coaction: CMat<T>,
        co: &Coalgebra<T>,
        zc: Option<Tensor<T>>,
    ) -> Result<Self> {
        let tol = co.tol;
        let zc = match zc {
            Some(t) => t,
            None => balanced_tensor(&module.as_bimodule(), &co.c().bimodule, tol)?,
        };
        if coaction.shape() != (zc.dim(), module.dim()) {
            return Err(shape(format!(
                "coaction is {}x{}, expected {}x{}",
                coaction.nrows(),
                coaction.ncols(),
                zc.dim(),
                module.dim()
            )));
        }
        let n = co.dim();
        let dz = module.dim();
        let scale = max_abs(&coaction).max(1.0);
        let mut checks = Checks::new();

        let zcr = &zc.bimodule.right.as_ref().expect("Z⊗C has a right action").mats;
        let lin = module
            .action()
            .iter()
            .zip(zcr.iter())
            .map(|(a, r)| max_abs(&(&coaction * a - r * &coaction)))
            .fold(0.0, f64::max);
        checks.record(
            "coaction-b-linear",
            "δ_Z(z·b) = δ_Z(z)·b",
            lin,
            tol.threshold(scale * scale),
            Kind::NotBLinear,
        );

        let ez = counit_map(&module, co);
        let ez_q = T::gemm(&ez, &zc.space.reps);
        let id = linalg::identity::<T>(dz);
        let counit = max_abs(&(T::gemm(&ez_q, &coaction) - &id))
            .max(relation_residual(&ez, &zc));
        checks.record(
            "coaction-counit",
            "(id_Z ⊗ ε)δ_Z = id_Z",
            counit,
            tol.threshold(scale),
            Kind::CounitFailure,
        );

        let zcc = balanced_tensor(&zc.bimodule, &co.c().bimodule, tol)?;
        let lifted = T::gemm(&zc.space.reps, &coaction);
        let idc = linalg::identity::<T>(n);
        let lhs = zcc.space.project(&kron_apply(&coaction, &idc, &lifted));
        let dc = T::gemm(&co.cc.space.reps, &co.delta);
        let rhs = zcc.space.project(&kron_apply(
            &zc.space.proj,
            &idc,
            &kron_apply(&linalg::identity(dz), &dc, &lifted),
        ));
        checks.record(
            "coaction-coassociative",
            "(δ_Z ⊗ id_C)δ_Z = (id_Z ⊗ δ)δ_Z",
            max_abs(&(lhs - rhs)),
            tol.threshold(scale * scale),
            Kind::CoassociativityFailure,
        );

        let pairing = pairing_maps(&module, co, &zc);
        let mut herm = 0.0f64;
        for i in 0..dz {
            let pi = T::gemm(&pairing[i], &coaction);
            for j in 0..dz {
                let pj = T::gemm(&pairing[j], &coaction);
                let lhs = pi.column(j).into_owned();
                let rhs = co.involute(&pj.column(i).into_owned());
                herm = herm.max(max_abs(&(lhs - rhs)));
            }
        }
        checks.record(
            "coaction-hermitian",
            "⟨z₁|δ_Z(z₂)⟩_C = ⟨z₂|δ_Z(z₁)⟩_C*",
            herm,
            tol.threshold(scale * scale),
            Kind::NotHermitian,
        );
        let hermitian_checked = checks.all_pass();
        Ok(Comodule { module, zc, coaction, hermitian_checked, checks })
    }

    /// As [`Comodule::assess`], failing with the first violated axiom.
    pub fn validate(
        module: HilbertModule<T>,
        coaction: CMat<T>,
        co: &Coalgebra<T>,
        zc: Option<Tensor<T>>,
    ) -> Result<Self> {
        let z = Self::assess(module, coaction, co, zc)?;
        z.checks.ensure()?;
        Ok(z)
    }

    /// Coaction given on full coordinates of `Z ⊗ C` (one column per basis vector of `Z`).
    /// From a coaction given on full coordinates `z_i ⊗ f_p* ⊗ f_q` of `Z ⊗ F* ⊗ F`,
    /// indexed `(i * m + p) * m + q`.
    pub fn from_full(
        module: HilbertModule<T>,
        full: &CMat<T>,
        co: &Coalgebra<T>,
    ) -> Result<Self> {
        let zc = balanced_tensor(&module.as_bimodule(), &co.c().bimodule, co.tol)?;
        let m = co.pair.m();
        if full.shape() != (module.dim() * m * m, module.dim()) {
            return Err(shape("coaction rows must match dim Z · (dim F)²"));
        }
        let lift = kron_apply(&linalg::identity(module.dim()), &co.c().space.proj, full);
        let q = zc.space.project(&lift);
        Self::assess(module, q, co, Some(zc))
    }

    /// The coaction on full coordinates of `Z ⊗ F* ⊗ F`, as read by `from_full`.
    pub fn to_full(&self, co: &Coalgebra<T>) -> CMat<T> {
        let lifted = self.zc.space.lift(&self.coaction);
        kron_apply(&linalg::identity(self.module.dim()), &co.c().space.reps, &lifted)
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    /// `ε_Z: Z ⊗_B C → Z` in quotient coordinates.
    pub fn counit(&self, co: &Coalgebra<T>) -> CMat<T> {
        T::gemm(&counit_map(&self.module, co), &self.zc.space.reps)
    }
}

/// `z_i ⊗ c_a ↦ z_i·ε(c_a)` on full coordinates of `Z ⊗ C`.
fn counit_map<T: Real>(module: &HilbertModule<T>, co: &Coalgebra<T>) -> CMat<T> {
    let n = co.dim();
    let dz = module.dim();
    let mut ez = CMat::zeros(dz, dz * n);
    for a in 0..n {
        let act = module.act(&co.eps().column(a).into_owned());
        for i in 0..dz {
            ez.set_column(i * n + a, &act.column(i));
        }
    }
    ez
}

/// `w ↦ ⟨z_i|w⟩_C` from `Z ⊗_B C` to `C`, one map per basis vector of `Z`.
fn pairing_maps<T: Real>(module: &HilbertModule<T>, co: &Coalgebra<T>, zc: &Tensor<T>) -> Vec<CMat<T>> {
    let n = co.dim();
    let dz = module.dim();
    let left = &co.c().bimodule.left.as_ref().expect("C has a left action").mats;
    (0..dz)
        .map(|i| {
            let mut full = CMat::zeros(n, dz * n);
            for j in 0..dz {
                let l = combine(left, &module.gram_entry(i, j));
                full.view_mut((0, j * n), (n, n)).copy_from(&l);
            }
            T::gemm(&full, &zc.space.reps)
        })
        .collect()
}

/// `F(X) = X ⊗_A F` with its canonical coaction `η_X ⊗ id_F`.
#[derive(Clone, Debug)]
pub struct Comparison<T: Real> {
    pub interior: Interior<T>,
    pub comodule: Comodule<T>,
}

pub fn comparison<T: Real>(x: &HilbertModule<T>, co: &Coalgebra<T>) -> Result<Comparison<T>> {
    let pair = &co.pair;
    let tol = co.tol;
    let f = &pair.correspondence;
    if !x.algebra().same_shape(&pair.a) {
        return Err(shape("module is not over the source algebra of the correspondence"));
    }
    let interior = interior_tensor(x, f, tol)?;
    let zq = &interior.tensor.space;
    let zmod = interior.module.clone();
    let zc = balanced_tensor(&zmod.as_bimodule(), &co.c().bimodule, tol)?;
    let m = pair.m();
    let n = co.dim();
    let dx = x.dim();
    let cproj = &co.c().space.proj;
    let v: Vec<CMat<T>> = (0..m)
        .map(|j| {
            let mut v = CMat::zeros(n, m);
            for q in 0..m {
                v.set_column(q, &cproj.column(q * m + j));
            }
            v.transpose()
        })
        .collect();
    let mut raw = CMat::zeros(zc.space.full_dim(), dx * m);
    for i in 0..dx {
        let uk = zq.proj.columns(i * m, m) * &pair.kappa;
        for (j, vt) in v.iter().enumerate() {
            let w = &uk * vt;
            raw.set_column(i * m + j, &linalg::vec_rows(&w));
        }
    }
    let full = zc.space.project(&raw);
    let mut checks = Checks::new();
    checks.record(
        "comparison-coaction-well-defined",
        "x·a ⊗ f and x ⊗ a·f have the same coaction",
        relation_residual(&full, &interior.tensor),
        tol.threshold(max_abs(&full).max(1.0)),
        Kind::NotWellDefined,
    );
    checks.ensure()?;
    let coaction = T::gemm(&full, &zq.reps);
    let mut comodule = Comodule::assess(zmod, coaction, co, Some(zc))?;
    checks.extend(&comodule.checks);
    comodule.checks = checks;
    comodule.checks.ensure()?;
    Ok(Comparison { interior, comodule })
}

/// The cotensor product `Z □_C F* = ker(id_Z ⊗ η_R − δ_Z ⊗ id_R)` as a Hilbert `A`-module.
#[derive(Clone, Debug)]
pub struct Cotensor<T: Real> {
    pub module: HilbertModule<T>,
    pub zr: Tensor<T>,
    /// Orthonormal basis of the kernel in quotient coordinates of `Z ⊗_B F*`.
    pub basis: CMat<T>,
    pub checks: Checks,
}

pub fn cotensor<T: Real>(z: &Comodule<T>, co: &Coalgebra<T>) -> Result<Cotensor<T>> {
    let pair = &co.pair;
    let tol = co.tol;
    if !pair.correspondence.faithful {
        return Err(Error::new(Kind::EtaNotFaithful, "η: A → K has a kernel"));
    }
    if !z.hermitian_checked {
        z.checks.ensure()?;
    }
    let m = pair.m();
    let n = co.dim();
    let dz = z.dim();
    let zr = balanced_tensor(&z.module.as_bimodule(), &pair.r, tol)?;
    let zcr = balanced_tensor(&z.zc.bimodule, &pair.r, tol)?;
    let cproj = &co.c().space.proj;
    let mut diff_full = CMat::zeros(zcr.space.full_dim(), dz * m);
    for i in 0..dz {
        let g = z.zc.space.proj.columns(i * n, n).into_owned();
        for r in 0..m {
            let unit_side = &g * cproj.columns(r * m, m) * &pair.kappa;
            let mut coact_side = CMat::zeros(z.zc.dim(), m);
            coact_side.set_column(r, &z.coaction.column(i));
            let w = unit_side - coact_side;
            diff_full.set_column(i * m + r, &linalg::vec_rows(&w));
        }
    }
    let diff = zcr.space.project(&diff_full);
    let mut checks = Checks::new();
    checks.record(
        "cotensor-map-well-defined",
        "id_Z ⊗ η_R − δ_Z ⊗ id_R respects the B-balancing",
        relation_residual(&diff, &zr),
        tol.threshold(max_abs(&diff).max(1.0)),
        Kind::NotWellDefined,
    );
    let d = T::gemm(&diff, &zr.space.reps);
    let basis = linalg::kernel(&d, tol).basis;
    let dy = basis.ncols();

    let ra = &zr.bimodule.right.as_ref().expect("Z⊗F* has a right A-action").mats;
    let proj = &basis * basis.adjoint();
    let mut inv = 0.0f64;
    let mut action = Vec::with_capacity(ra.len());
    for r in ra {
        let rb = r * &basis;
        inv = inv.max(max_abs(&(&rb - &proj * &rb)));
        action.push(basis.adjoint() * rb);
    }
    checks.record(
        "cotensor-a-invariant",
        "the kernel is an A-submodule",
        inv,
        tol.threshold(1.0),
        Kind::NotWellDefined,
    );

    let rho = pair.correspondence.module.action();
    let zgram = z.module.gram();
    let lifts: Vec<CMat<T>> = (0..dy)
        .map(|s| {
            let v = &zr.space.reps * basis.column(s);
            linalg::unvec(v.as_slice(), dz, m)
        })
        .collect();
    let da = pair.a.dim();
    let mut gram = vec![CMat::zeros(dy, dy); da];
    let mut escape = 0.0f64;
    let kproj = &pair.k.space.proj;
    for s in 0..dy {
        let xh = lifts[s].adjoint();
        for t in 0..dy {
            let mut mm = CMat::zeros(m, m);
            for (r, g) in rho.iter().zip(zgram.iter()) {
                mm += r * &xh * g * &lifts[t];
            }
            let k = kproj * linalg::vec_rows(&mm);
            let (a, res) = linalg::lstsq(&pair.eta, &linalg::cvec_to_mat(&k), tol);
            escape = escape.max(res);
            for (u, gu) in gram.iter_mut().enumerate() {
                gu[(s, t)] = a[(u, 0)];
            }
        }
    }
    checks.record(
        "cotensor-inner-product-in-eta-a",
        "⟨ξ|ζ⟩_K ∈ η(A)",
        escape,
        tol.threshold(1.0),
        Kind::InnerProductEscapesEtaA,
    );
    checks.ensure()?;
    let module = HilbertModule::validate(pair.a.clone(), action, gram, tol)?;
    Ok(Cotensor { module, zr, basis, checks })
}

/// Result of `X → F(X) □_C F*`.
#[derive(Clone, Debug)]
pub struct ModuleRoundTrip<T: Real> {
    pub comparison: Comparison<T>,
    pub cotensor: Cotensor<T>,
    /// `η_X` from `X` into the cotensor basis.
    pub map: CMat<T>,
    pub checks: Checks,
}

pub fn roundtrip_module<T: Real>(x: &HilbertModule<T>, co: &Coalgebra<T>) -> Result<ModuleRoundTrip<T>> {
    let pair = &co.pair;
    let tol = co.tol;
    let comparison = comparison(x, co)?;
    let cot = cotensor(&comparison.comodule, co)?;
    let m = pair.m();
    let dz = comparison.comodule.dim();
    let zq = &comparison.interior.tensor.space;
    let mut raw = CMat::zeros(cot.zr.space.full_dim(), x.dim());
    for i in 0..x.dim() {
        let w = zq.proj.columns(i * m, m) * &pair.kappa;
        debug_assert_eq!(w.nrows(), dz);
        raw.set_column(i, &linalg::vec_rows(&w));
    }
    let h = cot.zr.space.project(&raw);
    let map = cot.basis.adjoint() * &h;
    let mut checks = Checks::new();
    checks.record(
        "unit-lands-in-cotensor",
        "x ⊗ η(1) lies in the cotensor product",
        max_abs(&(&h - &cot.basis * &map)),
        tol.threshold(max_abs(&h).max(1.0)),
        Kind::NotSurjective,
    );
    let y = &cot.module;
    let bijective = y.dim() == x.dim() && linalg::rank(&map, tol) == x.dim();
    checks.record(
        "unit-bijective",
        "η_X: X → F(X) □_C F* is bijective",
        if bijective { 0.0 } else { 1.0 },
        0.0,
        Kind::NotSurjective,
    );
    let lin = x.linearity_residual(y, &map);
    checks.record(
        "unit-a-linear",
        "η_X(x·a) = η_X(x)·a",
        lin,
        tol.threshold(1.0),
        Kind::NotIsometric,
    );
    let iso = x.isometry_residual(y, &map);
    checks.record(
        "unit-isometric",
        "⟨η_X(x₁)|η_X(x₂)⟩ = ⟨x₁|x₂⟩",
        iso,
        tol.threshold(1.0),
        Kind::NotIsometric,
    );
    checks.ensure()?;
    Ok(ModuleRoundTrip { comparison, cotensor: cot, map, checks })
}

/// Result of `Z → (Z □_C F*) ⊗_A F`.
#[derive(Clone, Debug)]
pub struct Descent<T: Real> {
    pub cotensor: Cotensor<T>,
    /// `(Z □_C F*) ⊗_A F`.
    pub yf: Interior<T>,
    /// Inclusion of `(Z □_C F*) ⊗_A F` into `Z ⊗_B C`.
    pub iota: CMat<T>,
    /// `δ_Z` corestricted to the reconstructed module: `Z → (Z □_C F*) ⊗_A F`.
    pub unitary: CMat<T>,
    pub checks: Checks,
}

pub fn roundtrip_comodule<T: Real>(z: &Comodule<T>, co: &Coalgebra<T>) -> Result<Descent<T>> {
    if !z.hermitian_checked {
        z.checks.ensure()?;
    }
    let pair = &co.pair;
    let tol = co.tol;
    let cot = cotensor(z, co)?;
    let yf = interior_tensor(&cot.module, &pair.correspondence, tol)?;
    let m = pair.m();
    let n = co.dim();
    let dz = z.dim();
    let cproj = &co.c().space.proj;
    let vt: Vec<CMat<T>> = (0..m)
        .map(|j| {
            let mut v = CMat::zeros(n, m);
            for r in 0..m {
                v.set_column(r, &cproj.column(r * m + j));
            }
            v.transpose()
        })
        .collect();
    let dy = cot.module.dim();
    let mut raw = CMat::zeros(z.zc.space.full_dim(), dy * m);
    let lifted = cot.zr.space.lift(&cot.basis);
    for s in 0..dy {
        let xs = linalg::unvec(lifted.column(s).as_slice(), dz, m);
        for (j, vtj) in vt.iter().enumerate() {
            let w = &xs * vtj;
            raw.set_column(s * m + j, &linalg::vec_rows(&w));
        }
    }
    let full = z.zc.space.project(&raw);
    let mut checks = Checks::new();
    checks.record(
        "reconstruction-embedding-well-defined",
        "ξ·a ⊗ f and ξ ⊗ a·f embed identically",
        relation_residual(&full, &yf.tensor),
        tol.threshold(max_abs(&full).max(1.0)),
        Kind::NotWellDefined,
    );
    let iota = T::gemm(&full, &yf.tensor.space.reps);
    let img_iota = linalg::image(&iota, tol);
    let img_delta = linalg::image(&z.coaction, tol);
    let dist = linalg::subspace_distance(&img_iota, &img_delta)?;
    checks.record(
        "coaction-image",
        "δ_Z(Z) = (Z □_C F*) ⊗_A F inside Z ⊗_B C",
        dist,
        tol.threshold(1.0),
        Kind::ImageMismatch,
    );
    checks.ensure()?;
    let (unitary, fit) = linalg::lstsq(&iota, &z.coaction, tol);
    checks.record(
        "coaction-corestriction",
        "δ_Z factors through the reconstruction",
        fit,
        tol.threshold(max_abs(&z.coaction).max(1.0)),
        Kind::ImageMismatch,
    );
    let target = &yf.module;
    let bijective = target.dim() == dz && linalg::rank(&unitary, tol) == dz;
    checks.record(
        "coaction-bijective",
        "δ_Z: Z → (Z □_C F*) ⊗_A F is bijective",
        if bijective { 0.0 } else { 1.0 },
        0.0,
        Kind::NotUnitary,
    );
    let iso = z.module.isometry_residual(target, &unitary);
    checks.record(
        "coaction-unitary",
        "⟨δ_Z z₁|δ_Z z₂⟩ = ⟨z₁|z₂⟩ for the reconstructed inner product",
        iso,
        tol.threshold(1.0),
        Kind::NotUnitary,
    );
    checks.record(
        "coaction-comodule-map",
        "δ_Z intertwines δ_Z and id_Z ⊗ δ",
        z.checks.residual("coaction-coassociative"),
        z.checks.get("coaction-coassociative").map(|c| c.tolerance).unwrap_or(0.0),
        Kind::CoassociativityFailure,
    );
    checks.ensure()?;
    Ok(Descent { cotensor: cot, yf, iota, unitary, checks })
}

/// A descended morphism `s: Z □_C F* → W □_C F*`.
#[derive(Clone, Debug)]
pub struct MorphismDescent<T: Real> {
    pub map: CMat<T>,
    pub checks: Checks,
}

/// `t ⊗ id_{F*}` restricted to cotensors, after checking that `t` is a comodule map.
pub fn descend_morphism<T: Real>(
    t: &CMat<T>,
    z: &Comodule<T>,
    dz: &Descent<T>,
    w: &Comodule<T>,
    dw: &Descent<T>,
    co: &Coalgebra<T>,
) -> Result<MorphismDescent<T>> {
    let tol = co.tol;
    if t.shape() != (w.dim(), z.dim()) {
        return Err(shape("morphism shape does not match the comodules"));
    }
    let mut checks = Checks::new();
    let scale = max_abs(t).max(1.0);
    checks.record(
        "morphism-b-linear",
        "t(z·b) = t(z)·b",
        z.module.linearity_residual(&w.module, t),
        tol.threshold(scale),
        Kind::NotAdjointable,
    );
    let (t_adj, adj_res) = z.module.operator_adjoint(&w.module, t);
    checks.record(
        "morphism-adjointable",
        "⟨t z|w⟩ = ⟨z|t* w⟩",
        adj_res,
        tol.threshold(scale),
        Kind::NotAdjointable,
    );
    checks.ensure()?;
    let sq = comodule_square(t, z, w, co);
    checks.record(
        "morphism-comodule-square",
        "(t ⊗ id_C)δ_Z = δ_W t",
        sq,
        tol.threshold(scale * max_abs(&z.coaction).max(1.0)),
        Kind::NotAComoduleMap,
    );
    checks.ensure()?;
    let (s, leak) = restrict(t, dz, dw, co);
    checks.record(
        "morphism-preserves-cotensor",
        "t ⊗ id maps Z □_C F* into W □_C F*",
        leak,
        tol.threshold(scale),
        Kind::NotAComoduleMap,
    );
    let (s_adj_direct, _) = dz.cotensor.module.operator_adjoint(&dw.cotensor.module, &s);
    let (s_of_adj, _) = restrict(&t_adj, dw, dz, co);
    checks.record(
        "descent-star-functor",
        "descend(t)* = descend(t*)",
        max_abs(&(s_adj_direct - s_of_adj)),
        tol.threshold(scale),
        Kind::NotAdjointable,
    );
    // t corresponds to s ⊗ id_F under the unitaries δ_Z, δ_W.
    let m = co.pair.m();
    let (sf, _) = dz.yf.tensor.space.push(&s, &linalg::identity(m), &dw.yf.tensor.space);
    checks.record(
        "descent-certificate",
        "δ_W t = (s ⊗ id_F) δ_Z",
        max_abs(&(&dw.unitary * t - sf * &dz.unitary)),
        tol.threshold(scale),
        Kind::NotAComoduleMap,
    );
    checks.ensure()?;
    Ok(MorphismDescent { map: s, checks })
}

/// Residual of the comodule-map square for `t: Z → W`.
pub fn comodule_square<T: Real>(t: &CMat<T>, z: &Comodule<T>, w: &Comodule<T>, co: &Coalgebra<T>) -> f64 {
    let n = co.dim();
    let lifted = T::gemm(&z.zc.space.reps, &z.coaction);
    let lhs = w.zc.space.project(&kron_apply(t, &linalg::identity(n), &lifted));
    max_abs(&(lhs - T::gemm(&w.coaction, t)))
}

fn restrict<T: Real>(t: &CMat<T>, dz: &Descent<T>, dw: &Descent<T>, co: &Coalgebra<T>) -> (CMat<T>, f64) {
    let m = co.pair.m();
    let lifted = T::gemm(&dz.cotensor.zr.space.reps, &dz.cotensor.basis);
    let img = dw.cotensor.zr.space.project(&kron_apply(t, &linalg::identity(m), &lifted));
    let xi = &dw.cotensor.basis;
    let s = xi.adjoint() * &img;
    let leak = max_abs(&(&img - xi * &s));
    (s, leak)
}

/// Norms of the amplifications `id_{M_n} ⊗ t` for `n = 1..levels`, computed in the
/// localization of `M_n(X)` at the defining representation of `M_n(B)`.
pub fn cb_audit<T: Real>(
    source: &HilbertModule<T>,
    target: &HilbertModule<T>,
    t: &CMat<T>,
    levels: usize,
    tol: Tolerance,
) -> Result<Vec<f64>> {
    if t.shape() != (target.dim(), source.dim()) {
        return Err(shape("map shape does not match the modules"));
    }
    let amb = source.algebra().ambient_dim();
    let mut out = Vec::with_capacity(levels);
    for n in 1..=levels {
        let gx = localized_gram(source, n);
        let gy = localized_gram(target, n);
        let phi = linalg::kron(
            &linalg::identity(n * n),
            &linalg::kron(t, &linalg::identity(n * amb)),
        );
        let (w, v) = T::eigh(&linalg::hermitian_part(&gx));
        let wmax = w.last().map(|x| crate::scalar::f64_of(*x)).unwrap_or(0.0);
        let keep: Vec<usize> = (0..w.len())
            .filter(|&i| crate::scalar::f64_of(w[i]) > tol.threshold(wmax))
            .collect();
        let mut p = CMat::zeros(gx.nrows(), keep.len());
        for (c, &i) in keep.iter().enumerate() {
            let s = crate::scalar::real::<T>(1.0 / crate::scalar::f64_of(w[i]).sqrt());
            p.set_column(c, &(v.column(i) * num_complex::Complex::new(s, T::zero())));
        }
        let q = p.adjoint() * phi.adjoint() * gy * &phi * &p;
        let (ev, _) = T::eigh(&linalg::hermitian_part(&q));
        let top = ev.last().map(|x| crate::scalar::f64_of(*x)).unwrap_or(0.0);
        out.push(top.max(0.0).sqrt());
    }
    Ok(out)
}

/// Gram form on `M_n(X) ⊗ C^n ⊗ C^amb`, indexed `(a, b, i, c, σ)` for the vector
/// `(E_ab ⊗ x_i) ⊗ e_c ⊗ e_σ`.
fn localized_gram<T: Real>(x: &HilbertModule<T>, n: usize) -> CMat<T> {
    let d = x.dim();
    let amb = x.algebra().ambient_dim();
    let reps: Vec<Vec<CMat<T>>> = (0..d)
        .map(|i| (0..d).map(|j| x.algebra().rep(&x.gram_entry(i, j))).collect())
        .collect();
    let idx = |a: usize, b: usize, i: usize, c: usize, s: usize| ((((a * n + b) * d + i) * n + c) * amb) + s;
    let size = n * n * d * n * amb;
    let mut g = CMat::zeros(size, size);
    for a in 0..n {
        for b in 0..n {
            for bp in 0..n {
                // ⟨E_ab ⊗ x_i|E_ab' ⊗ x_j⟩ = E_bb' ⊗ ⟨x_i|x_j⟩, localized at e_b ⊗ ·, e_b' ⊗ ·.
                for i in 0..d {
                    for j in 0..d {
                        let r = &reps[i][j];
                        for s in 0..amb {
                            for sp in 0..amb {
                                g[(idx(a, b, i, b, s), idx(a, bp, j, bp, sp))] = r[(s, sp)];
                            }
                        }
                    }
                }
            }
        }
    }
    g
}
