//! Relative one-forms `Ω(B, A)`, connections, curvature and the dictionary between flat
//! Hermitian connections and comodules over `B ⊗_A B`.

use crate::algebra::Inclusion;
use crate::coalgebra::Coalgebra;
use crate::comodule::{cotensor, Comodule};
use crate::error::{shape, Error, Kind, Result};
use crate::linalg::{self, kron_apply, max_abs, Tolerance};
use crate::module::{combine, Action, Bimodule, HilbertModule};
use crate::pair::relation_residual;
use crate::report::Checks;
use crate::scalar::{f64_of, CMat, CVec, Real};
use crate::tensor::{balanced_tensor, interior_tensor, Tensor};
use std::sync::Arc;

/// `Ω = ker(ε) ⊆ C = B ⊗_A B` with `d` and `d¹`.
#[derive(Clone, Debug)]
pub struct Omega<T: Real> {
    pub co: Arc<Coalgebra<T>>,
    /// Orthonormal basis of `Ω` in quotient coordinates of `C`.
    pub basis: CMat<T>,
    pub bimodule: Bimodule<T>,
    /// `d: B → C`.
    pub d_c: CMat<T>,
    /// `d: B → Ω`.
    pub d: CMat<T>,
    /// `d¹` on `C` coordinates, landing in `C ⊗_B C` (meaningful on `Ω`).
    pub d1_c: CMat<T>,
    /// `ω* = star · conj(ω)` on `Ω` coordinates.
    pub star: CMat<T>,
    pub tol: Tolerance,
    pub checks: Checks,
}

impl<T: Real> Omega<T> {
    /// Requires the coalgebra of the subalgebra pair of `inc`.
    pub fn new(inc: &Inclusion<T>, co: Arc<Coalgebra<T>>) -> Result<Self> {
        let pair = &co.pair;
        let b = &pair.b;
        if !b.same_shape(&inc.amb) || !pair.a.same_shape(&inc.sub) || pair.m() != b.dim() {
            return Err(shape("coalgebra does not come from this inclusion"));
        }
        let tol = co.tol;
        let db = b.dim();
        let c = co.c();
        let n = c.dim();
        let sconj = b.star_matrix().conjugate();
        let bb = |x: &CVec<T>, y: &CVec<T>| -> CVec<T> {
            &c.space.proj * linalg::kron(&linalg::cvec_to_mat(&(&sconj * x)), &linalg::cvec_to_mat(y)).column(0)
        };
        let one = b.unit().clone();
        let mut d_c = CMat::zeros(n, db);
        for k in 0..db {
            let e = b.basis_vector(k);
            d_c.set_column(k, &(bb(&one, &e) - bb(&e, &one)));
        }
        let eps = co.eps();
        let basis = linalg::kernel(eps, tol).basis;
        let d = basis.adjoint() * &d_c;

        let cl = &c.bimodule.left.as_ref().expect("C has a left action").mats;
        let cr = &c.bimodule.right.as_ref().expect("C has a right action").mats;
        let restrict = |m: &CMat<T>| basis.adjoint() * m * &basis;
        let bimodule = Bimodule {
            dim: basis.ncols(),
            left: Some(Action { algebra: b.clone(), mats: cl.iter().map(restrict).collect() }),
            right: Some(Action { algebra: b.clone(), mats: cr.iter().map(restrict).collect() }),
        };

        let m = pair.m();
        let s = b.star_matrix();
        let cc = &co.cc;
        let mut d1_full = CMat::zeros(cc.dim(), m * m);
        for i in 0..m {
            let di = &d_c * s.column(i);
            for j in 0..m {
                let dj = d_c.column(j).into_owned();
                let v = &cc.space.proj * linalg::kron(&linalg::cvec_to_mat(&di), &linalg::cvec_to_mat(&dj)).column(0);
                d1_full.set_column(i * m + j, &v);
            }
        }
        let d1_c = &d1_full * &c.space.reps;
        let star = basis.adjoint() * &co.star * basis.conjugate();

        let mut checks = Checks::new();
        let scale = max_abs(&d_c).max(1.0);
        checks.record(
            "d-lands-in-omega",
            "ε(d(b)) = 0",
            max_abs(&(eps * &d_c)),
            tol.threshold(scale),
            Kind::LeibnizFailure,
        );
        let pb = &basis * basis.adjoint();
        let sb = &co.star * basis.conjugate();
        checks.record(
            "omega-star-stable",
            "Ω* = Ω",
            max_abs(&(&sb - &pb * &sb)),
            tol.threshold(1.0),
            Kind::LeibnizFailure,
        );
        let mut leib = 0.0f64;
        for k in 0..db {
            for l in 0..db {
                let prod = b.multiply(&b.basis_vector(k), &b.basis_vector(l));
                let lhs = &d_c * prod;
                let rhs = &cr[l] * d_c.column(k) + &cl[k] * d_c.column(l);
                leib = leib.max(max_abs(&(lhs - rhs)));
            }
        }
        checks.record(
            "d-leibniz",
            "d(bb') = d(b)b' + b d(b')",
            leib,
            tol.threshold(scale * scale),
            Kind::LeibnizFailure,
        );
        let dstar = max_abs(&(&d_c * s + &co.star * d_c.conjugate()));
        checks.record(
            "d-star",
            "d(b*) = −d(b)*",
            dstar,
            tol.threshold(scale),
            Kind::LeibnizFailure,
        );
        let d1_scale = max_abs(&d1_full).max(1.0);
        checks.record(
            "d1-well-defined",
            "d ⊗ d is balanced over A",
            relation_residual(&d1_full, c),
            tol.threshold(d1_scale),
            Kind::LeibnizFailure,
        );
        checks.record(
            "d1-d-zero",
            "d¹ ∘ d = 0",
            max_abs(&(&d1_c * &d_c)),
            tol.threshold(d1_scale * scale),
            Kind::LeibnizFailure,
        );
        let ccl = &cc.bimodule.left.as_ref().expect("C⊗C has a left action").mats;
        let ccr = &cc.bimodule.right.as_ref().expect("C⊗C has a right action").mats;
        let (mut left_rule, mut right_rule) = (0.0f64, 0.0f64);
        for k in 0..db {
            let dk = linalg::cvec_to_mat(&d_c.column(k).into_owned());
            for w in 0..basis.ncols() {
                let om = linalg::cvec_to_mat(&basis.column(w).into_owned());
                let d1w = &d1_c * &om;
                let lhs = &d1_c * &cl[k] * &om;
                let rhs = &cc.space.proj * linalg::kron(&dk, &om) + &ccl[k] * &d1w;
                left_rule = left_rule.max(max_abs(&(lhs - rhs)));
                let lhs = &d1_c * &cr[k] * &om;
                let rhs = &ccr[k] * &d1w - &cc.space.proj * linalg::kron(&om, &dk);
                right_rule = right_rule.max(max_abs(&(lhs - rhs)));
            }
        }
        checks.record(
            "d1-leibniz-left",
            "d¹(bω) = d(b) ⊗ ω + b d¹(ω)",
            left_rule,
            tol.threshold(d1_scale * scale),
            Kind::LeibnizFailure,
        );
        checks.record(
            "d1-leibniz-right",
            "d¹(ωb) = d¹(ω)b − ω ⊗ d(b)",
            right_rule,
            tol.threshold(d1_scale * scale),
            Kind::LeibnizFailure,
        );
        let d1_star = max_abs(&(&d1_c * &co.star * basis.conjugate() - &co.star_cc * (&d1_c * &basis).conjugate()));
        checks.record(
            "d1-star",
            "d¹(ω*) = d¹(ω)*",
            d1_star,
            tol.threshold(d1_scale),
            Kind::LeibnizFailure,
        );
        checks.ensure()?;
        Ok(Omega { co, basis, bimodule, d_c, d, d1_c, star, tol, checks })
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `d¹` on `Ω` coordinates, landing in `C ⊗_B C`.
    pub fn d1(&self) -> CMat<T> {
        &self.d1_c * &self.basis
    }

    /// The kernel of `d`, as a subspace of `B` coordinates.
    pub fn kernel_of_d(&self) -> linalg::Subspace<T> {
        linalg::kernel(&self.d, self.tol)
    }
}

/// `Z ⊗_B Ω`, `Z ⊗_B C` in coordinates adapted to `C = Ω ⊕ B·(1⊗1)`, and the maps
/// between them, for one Hilbert module `Z`.
#[derive(Clone, Debug)]
pub struct Dictionary<T: Real> {
    pub module: HilbertModule<T>,
    pub zomega: Tensor<T>,
    /// `Z ⊗_B C` whose first `dim(Z ⊗ Ω)` coordinates are `Z ⊗ Ω` and whose last
    /// `dim Z` coordinates are `z_i ⊗ 1 ⊗ 1`.
    pub zc: Tensor<T>,
}

impl<T: Real> Dictionary<T> {
    pub fn new(module: HilbertModule<T>, omega: &Omega<T>) -> Result<Self> {
        let tol = omega.tol;
        let co = &omega.co;
        let zb = module.as_bimodule();
        let zomega = balanced_tensor(&zb, &omega.bimodule, tol)?;
        let zc = balanced_tensor(&zb, &co.c().bimodule, tol)?;
        let dz = module.dim();
        let embed = &zc.space.proj
            * kron_apply(&linalg::identity(dz), &omega.basis, &zomega.space.reps);
        let b = &co.pair.b;
        let sconj = b.star_matrix().conjugate();
        let unit = b.unit();
        let one_one = &co.c().space.proj
            * linalg::kron(&linalg::cvec_to_mat(&(&sconj * unit)), &linalg::cvec_to_mat(unit)).column(0);
        let u = &zc.space.proj * linalg::kron(&linalg::identity(dz), &linalg::cvec_to_mat(&one_one));
        let split = linalg::hstack(zc.dim(), &[&embed, &u]);
        if split.ncols() != zc.dim() {
            return Err(Error::new(
                Kind::NotWellDefined,
                "Z ⊗ Ω and Z ⊗ (1⊗1) do not split Z ⊗ C",
            ));
        }
        let reps = &zc.space.reps * split;
        let zc = zc.rebase(reps, &zb, &co.c().bimodule)?;
        Ok(Dictionary { module, zomega, zc })
    }

    pub fn omega_dim(&self) -> usize {
        self.zomega.dim()
    }

    /// A coaction re-expressed in the split coordinates.
    pub fn to_split(&self, z: &Comodule<T>) -> CMat<T> {
        let full = &z.zc.space.reps * &z.coaction;
        &self.zc.space.proj * full
    }

    /// `E`: the connection `z ↦ (id ⊗ (c − ε(c) ⊗ 1))δ_Z(z)` of a split coaction.
    pub fn connection_of(&self, coaction: &CMat<T>) -> CMat<T> {
        coaction.rows(0, self.omega_dim()).into_owned()
    }

    /// `D`: the coaction `z ↦ ∇(z) + z ⊗ 1 ⊗ 1` in split coordinates.
    pub fn coaction_of(&self, nabla: &CMat<T>) -> CMat<T> {
        let dz = self.module.dim();
        let mut out = CMat::zeros(self.omega_dim() + dz, dz);
        out.rows_mut(0, self.omega_dim()).copy_from(nabla);
        out.rows_mut(self.omega_dim(), dz).copy_from(&linalg::identity::<T>(dz));
        out
    }

    /// How far the last block of a split coaction is from the identity.
    pub fn normalization_residual(&self, coaction: &CMat<T>) -> f64 {
        let dz = self.module.dim();
        max_abs(&(coaction.rows(self.omega_dim(), dz) - linalg::identity::<T>(dz)))
    }
}

/// A connection `∇: Z → Z ⊗_B Ω` with its curvature.
#[derive(Clone, Debug)]
pub struct Connection<T: Real> {
    pub module: HilbertModule<T>,
    pub zomega: Tensor<T>,
    /// `∇` in quotient coordinates of `Z ⊗_B Ω`.
    pub nabla: CMat<T>,
    /// Curvature `Z → Z ⊗_B C ⊗_B C`.
    pub curvature: CMat<T>,
    pub curvature_norm: f64,
    pub flat: bool,
    pub hermitian: bool,
    pub checks: Checks,
}

impl<T: Real> Connection<T> {
    /// Checks the Leibniz rule (failing on violation), then evaluates the Hermitian
    /// condition and the curvature and records both as flags.
    pub fn validate(
        module: HilbertModule<T>,
        nabla: CMat<T>,
        omega: &Omega<T>,
        zomega: Option<Tensor<T>>,
    ) -> Result<Self> {
        let tol = omega.tol;
        let zomega = match zomega {
            Some(t) => t,
            None => balanced_tensor(&module.as_bimodule(), &omega.bimodule, tol)?,
        };
        let dz = module.dim();
        if nabla.shape() != (zomega.dim(), dz) {
            return Err(shape(format!(
                "connection is {}x{}, expected {}x{}",
                nabla.nrows(),
                nabla.ncols(),
                zomega.dim(),
                dz
            )));
        }
        let mut checks = Checks::new();
        let scale = max_abs(&nabla).max(1.0);
        let zr = &zomega.bimodule.right.as_ref().expect("Z⊗Ω has a right action").mats;
        let b = &omega.co.pair.b;
        for k in 0..b.dim() {
            let dk = linalg::cvec_to_mat(&omega.d.column(k).into_owned());
            let z_db = zomega.space.project(&linalg::kron(&linalg::identity(dz), &dk));
            let res = &nabla * &module.action()[k] - &zr[k] * &nabla - z_db;
            let worst = (0..dz)
                .map(|i| (i, max_abs(&res.column(i).into_owned())))
                .fold((0, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
            checks.record(
                format!("leibniz[b{k}]"),
                format!("∇(z·b) = ∇(z)·b + z ⊗ d(b), worst at z{}", worst.0),
                worst.1,
                tol.threshold(scale),
                Kind::LeibnizFailure,
            );
        }
        checks.ensure()?;

        let herm = hermitian_residual(&module, &nabla, omega, &zomega);
        let hermitian = checks.record(
            "hermitian",
            "⟨z₁|∇z₂⟩_Ω − ⟨z₂|∇z₁⟩_Ω* = d⟨z₁|z₂⟩",
            herm,
            tol.threshold(scale),
            Kind::NotHermitian,
        );
        let (curvature, well) = curvature_map(&module, &nabla, omega, &zomega, 1.0)?;
        checks.record(
            "curvature-well-defined",
            "id ⊗ d¹ + ∇ ⊗ id is balanced over B",
            well,
            tol.threshold(scale * scale),
            Kind::NotWellDefined,
        );
        let curvature_norm = whitened_norm(&module, &curvature);
        let flat = checks.record(
            "flat",
            "the curvature vanishes",
            curvature_norm,
            tol.threshold(scale * scale),
            Kind::NotFlat,
        );
        Ok(Connection { module, zomega, nabla, curvature, curvature_norm, flat, hermitian, checks })
    }

    /// `∇ = d` on `B` over itself.
    pub fn trivial(omega: &Omega<T>) -> Result<Self> {
        let b = omega.co.pair.b.clone();
        let z = HilbertModule::over_itself(b.clone(), omega.tol)?;
        let frame = linalg::cvec_to_mat(b.unit());
        grassmann_connection(z, &frame, omega)
    }
}

/// Largest violation of the Hermitian identity over basis pairs.
fn hermitian_residual<T: Real>(
    module: &HilbertModule<T>,
    nabla: &CMat<T>,
    omega: &Omega<T>,
    zomega: &Tensor<T>,
) -> f64 {
    let dz = module.dim();
    let w = omega.dim();
    let left = &omega.bimodule.left.as_ref().expect("Ω has a left action").mats;
    let pairing: Vec<CMat<T>> = (0..dz)
        .map(|i| {
            let mut full = CMat::zeros(w, dz * w);
            for j in 0..dz {
                full.view_mut((0, j * w), (w, w)).copy_from(&combine(left, &module.gram_entry(i, j)));
            }
            full * &zomega.space.reps * nabla
        })
        .collect();
    let mut res = 0.0f64;
    for i in 0..dz {
        for j in 0..dz {
            let lhs = pairing[i].column(j) - &omega.star * pairing[j].column(i).conjugate();
            let rhs = &omega.d * module.gram_entry(i, j);
            res = res.max(max_abs(&(lhs - rhs)));
        }
    }
    res
}

/// `(id_Z ⊗ d¹ + sign · ∇ ⊗ id_Ω) ∘ ∇` into `Z ⊗_B (C ⊗_B C)`, with the residual of the
/// outer map on the balancing relations of `Z ⊗_B Ω`.
pub fn curvature_map<T: Real>(
    module: &HilbertModule<T>,
    nabla: &CMat<T>,
    omega: &Omega<T>,
    zomega: &Tensor<T>,
    sign: f64,
) -> Result<(CMat<T>, f64)> {
    let co = &omega.co;
    let dz = module.dim();
    let w = omega.dim();
    let zcc = balanced_tensor(&module.as_bimodule(), &co.cc.bimodule, omega.tol)?;
    let d1 = omega.d1();
    let term1 = linalg::kron(&linalg::identity(dz), &d1);
    let omega2 = &co.cc.space.proj * linalg::kron(&omega.basis, &omega.basis);
    let lifted = &zomega.space.reps * nabla;
    let term2 = linalg::kron(&linalg::identity(dz), &omega2) * linalg::kron(&lifted, &linalg::identity(w));
    let outer = zcc.space.project(&(term1 + term2 * crate::scalar::cx::<T>(sign, 0.0)));
    let well = relation_residual(&outer, zomega);
    Ok((outer * lifted, well))
}

fn whitened_norm<T: Real>(module: &HilbertModule<T>, m: &CMat<T>) -> f64 {
    let winv = linalg::hermitian_function(module.weight(), |x| 1.0 / x.sqrt());
    linalg::spectral_norm(&(m * winv))
}

/// `∇(z) = Σ x_k ⊗ d⟨x_k|z⟩` for a frame `{x_k}` (columns of `frame`).
pub fn grassmann_connection<T: Real>(
    module: HilbertModule<T>,
    frame: &CMat<T>,
    omega: &Omega<T>,
) -> Result<Connection<T>> {
    let tol = omega.tol;
    let dz = module.dim();
    if frame.nrows() != dz {
        return Err(shape("frame vectors must live in the module"));
    }
    let mut recon = CMat::zeros(dz, dz);
    for k in 0..frame.ncols() {
        let x = frame.column(k).into_owned();
        for j in 0..dz {
            let g = module.inner(&x, &linalg::basis_vector(dz, j));
            let v = module.act(&g) * &x;
            let mut col = recon.column_mut(j);
            col += v;
        }
    }
    let frame_res = max_abs(&(recon - linalg::identity::<T>(dz)));
    if frame_res > tol.threshold(max_abs(frame).max(1.0).powi(2)) {
        return Err(Error::new(
            Kind::NotAFrame,
            format!("Σ x_k⟨x_k|z⟩ differs from z by {frame_res:.3e}"),
        ));
    }
    let zomega = balanced_tensor(&module.as_bimodule(), &omega.bimodule, tol)?;
    let mut nabla = CMat::zeros(zomega.dim(), dz);
    for k in 0..frame.ncols() {
        let x = linalg::cvec_to_mat(&frame.column(k).into_owned());
        for j in 0..dz {
            let g = module.inner(&frame.column(k).into_owned(), &linalg::basis_vector(dz, j));
            let dg = linalg::cvec_to_mat(&(&omega.d * g));
            let v = zomega.space.project(&linalg::kron(&x, &dg));
            let mut col = nabla.column_mut(j);
            col += v.column(0);
        }
    }
    Connection::validate(module, nabla, omega, Some(zomega))
}

/// A frame `x_k = Σ_i e_i h_ik` with `h = G^{+1/2}` for the Gram matrix `G ∈ M_m(B)`.
pub fn auto_frame<T: Real>(module: &HilbertModule<T>) -> Result<CMat<T>> {
    let b = module.algebra();
    let amb = b.ambient_dim();
    let dz = module.dim();
    let tol = module.tolerance();
    let g = module.block_gram();
    let (w, _) = T::eigh(&linalg::hermitian_part(&g));
    let top = w.last().map(|x| f64_of(*x)).unwrap_or(0.0);
    let cut = tol.threshold(top);
    let h = linalg::hermitian_function(&g, |x| if x > cut { 1.0 / x.sqrt() } else { 0.0 });
    let mut frame = CMat::zeros(dz, dz);
    for k in 0..dz {
        let mut x = CVec::zeros(dz);
        for i in 0..dz {
            let block = h.view((i * amb, k * amb), (amb, amb)).into_owned();
            let c = b.coords(&block).ok_or_else(|| {
                Error::new(Kind::NotAFrame, "Gram square root leaves the algebra")
            })?;
            x += module.act(&c).column(i);
        }
        frame.set_column(k, &x);
    }
    Ok(frame)
}

/// `E(Z, δ_Z) = (Z, ∇_{δ_Z})`.
pub fn comodule_to_connection<T: Real>(z: &Comodule<T>, omega: &Omega<T>) -> Result<(Connection<T>, Dictionary<T>)> {
    let dict = Dictionary::new(z.module.clone(), omega)?;
    let split = dict.to_split(z);
    let nabla = dict.connection_of(&split);
    let conn = Connection::validate(z.module.clone(), nabla, omega, Some(dict.zomega.clone()))?;
    Ok((conn, dict))
}

/// `D(Z, ∇) = (Z, δ_∇)`, for flat Hermitian connections only.
pub fn connection_to_comodule<T: Real>(
    conn: &Connection<T>,
    omega: &Omega<T>,
    dict: Option<&Dictionary<T>>,
) -> Result<Comodule<T>> {
    if !conn.flat {
        return Err(Error::new(
            Kind::NotFlat,
            format!("curvature norm {:.3e}", conn.curvature_norm),
        ));
    }
    if !conn.hermitian {
        return Err(Error::new(Kind::NotHermitian, "connection is not Hermitian"));
    }
    let owned;
    let dict = match dict {
        Some(d) => d,
        None => {
            owned = Dictionary::new(conn.module.clone(), omega)?;
            &owned
        }
    };
    let coaction = dict.coaction_of(&conn.nabla);
    Comodule::validate(conn.module.clone(), coaction, &omega.co, Some(dict.zc.clone()))
}

/// `ker(∇)` as a Hilbert `A`-module, compared with the cotensor of `δ_∇`, with the
/// unitary `ker(∇) ⊗_A B → Z`.
#[derive(Clone, Debug)]
pub struct ConnectionDescent<T: Real> {
    pub module: HilbertModule<T>,
    /// Orthonormal basis of `ker ∇` in coordinates of `Z`.
    pub basis: CMat<T>,
    /// `x ⊗ b ↦ x·b` from `ker(∇) ⊗_A B` to `Z`.
    pub witness: CMat<T>,
    /// `x ↦ x ⊗ 1*` from `ker ∇` into the cotensor of `δ_∇`.
    pub to_cotensor: CMat<T>,
    pub checks: Checks,
}

pub fn descend_via_connection<T: Real>(
    conn: &Connection<T>,
    omega: &Omega<T>,
    inc: &Inclusion<T>,
) -> Result<ConnectionDescent<T>> {
    let tol = omega.tol;
    let co = &omega.co;
    let z = connection_to_comodule(conn, omega, None)?;
    let basis = linalg::kernel(&conn.nabla, tol).basis;
    let a = inc.sub.clone();
    let zmod = &conn.module;
    let mut checks = Checks::new();
    let proj = &basis * basis.adjoint();
    let mut inv = 0.0f64;
    let mut action = Vec::with_capacity(a.dim());
    for k in 0..a.dim() {
        let r = zmod.act(&inc.embed(&a.basis_vector(k))) * &basis;
        inv = inv.max(max_abs(&(&r - &proj * &r)));
        action.push(basis.adjoint() * r);
    }
    checks.record(
        "kernel-a-invariant",
        "ker ∇ is an A-submodule",
        inv,
        tol.threshold(1.0),
        Kind::NotWellDefined,
    );
    let dx = basis.ncols();
    let mut gram = vec![CMat::zeros(dx, dx); a.dim()];
    let mut escape = 0.0f64;
    for s in 0..dx {
        for t in 0..dx {
            let g = zmod.inner(&basis.column(s).into_owned(), &basis.column(t).into_owned());
            let (x, res) = linalg::lstsq(&inc.embedding, &linalg::cvec_to_mat(&g), tol);
            escape = escape.max(res);
            for (u, gu) in gram.iter_mut().enumerate() {
                gu[(s, t)] = x[(u, 0)];
            }
        }
    }
    checks.record(
        "kernel-inner-product-in-a",
        "⟨x₁|x₂⟩ ∈ A for x₁, x₂ ∈ ker ∇",
        escape,
        tol.threshold(1.0),
        Kind::InnerProductEscapesEtaA,
    );
    checks.ensure()?;
    let module = HilbertModule::validate(a.clone(), action, gram, tol)?;

    let cot = cotensor(&z, co)?;
    let b = &co.pair.b;
    let one_star = b.star_matrix().conjugate() * b.unit();
    let full = linalg::kron(&basis, &linalg::cvec_to_mat(&one_star));
    let img = cot.zr.space.project(&full);
    let to_cotensor = cot.basis.adjoint() * &img;
    checks.record(
        "kernel-in-cotensor",
        "x ⊗ 1* lies in Z □_C F*",
        max_abs(&(&img - &cot.basis * &to_cotensor)),
        tol.threshold(1.0),
        Kind::ImageMismatch,
    );
    let bij = dx == cot.module.dim() && linalg::rank(&to_cotensor, tol) == dx;
    checks.record(
        "kernel-equals-cotensor",
        "ker ∇ ≅ Z □_C F*",
        if bij { 0.0 } else { 1.0 },
        0.0,
        Kind::ImageMismatch,
    );
    checks.record(
        "kernel-cotensor-isometric",
        "the identification preserves A-valued inner products",
        module.isometry_residual(&cot.module, &to_cotensor),
        tol.threshold(1.0),
        Kind::NotIsometric,
    );

    let xb = interior_tensor(&module, &co.pair.correspondence, tol)?;
    let db = b.dim();
    let mut wfull = CMat::zeros(zmod.dim(), dx * db);
    for i in 0..dx {
        for j in 0..db {
            let v = zmod.act(&b.basis_vector(j)) * basis.column(i);
            wfull.set_column(i * db + j, &v);
        }
    }
    checks.record(
        "witness-well-defined",
        "x·a ⊗ b and x ⊗ ab have the same image",
        relation_residual(&wfull, &xb.tensor),
        tol.threshold(1.0),
        Kind::NotWellDefined,
    );
    let witness = wfull * &xb.tensor.space.reps;
    let wbij = witness.nrows() == witness.ncols() && linalg::rank(&witness, tol) == witness.ncols();
    checks.record(
        "witness-bijective",
        "ker(∇) ⊗_A B → Z is bijective",
        if wbij { 0.0 } else { 1.0 },
        0.0,
        Kind::NotUnitary,
    );
    checks.record(
        "witness-unitary",
        "ker(∇) ⊗_A B → Z preserves inner products",
        xb.module.isometry_residual(zmod, &witness),
        tol.threshold(1.0),
        Kind::NotUnitary,
    );
    checks.record(
        "witness-b-linear",
        "x ⊗ bb' ↦ x·b·b'",
        xb.module.linearity_residual(zmod, &witness),
        tol.threshold(1.0),
        Kind::NotUnitary,
    );
    checks.ensure()?;
    Ok(ConnectionDescent { module, basis, witness, to_cotensor, checks })
}
