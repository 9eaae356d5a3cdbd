//! Adjoint pairs `(L, R)` of bimodules and the algebra `K = L ⊗_B R`.

use crate::algebra::{AlgebraRef, Inclusion};
use crate::error::{Error, Kind, Result};
use crate::linalg::{self, max_abs, Subspace, Tolerance};
use crate::module::{Bimodule, Correspondence};
use crate::report::Checks;
use crate::scalar::{CMat, CVec, Real};
use crate::tensor::{balanced_tensor, Tensor};

/// The adjoint pair `(F, F*)` of a correspondence `A → B`.
///
/// `K = F ⊗_B F*` is identified with `K_B(F)` through `f ⊗ g* ↦ θ_{f,g}` and
/// `C = F* ⊗_A F` carries the counit `f₁* ⊗ f₂ ↦ ⟨f₁|f₂⟩`.
#[derive(Clone, Debug)]
pub struct AdjointPair<T: Real> {
    pub a: AlgebraRef<T>,
    pub b: AlgebraRef<T>,
    pub correspondence: Correspondence<T>,
    pub l: Bimodule<T>,
    pub r: Bimodule<T>,
    pub k: Tensor<T>,
    pub c: Tensor<T>,
    /// `η: A → K` in quotient coordinates of `K`.
    pub eta: CMat<T>,
    /// `ε: C → B` in quotient coordinates of `C`.
    pub eps: CMat<T>,
    /// Column-major vectorized operator `θ(k)` on `F` for each quotient basis vector of `K`.
    pub theta: CMat<T>,
    /// A full-coordinate lift of `η(1)`: `Σ κ_pq e_p ⊗ e_q*`.
    pub kappa: CMat<T>,
    pub tol: Tolerance,
    checks: Checks,
}

impl<T: Real> AdjointPair<T> {
    pub fn from_correspondence(f: Correspondence<T>, tol: Tolerance) -> Result<Self> {
        let m = f.module.dim();
        let a = f.left_algebra.clone();
        let b = f.module.algebra().clone();
        let l = f.bimodule();
        let r = l.adjoint();
        let k = balanced_tensor(&l, &r, tol)?;
        let c = balanced_tensor(&r, &l, tol)?;
        let mut checks = Checks::new();

        let mut theta_full = CMat::zeros(m * m, m * m);
        for p in 0..m {
            let ep = linalg::basis_vector::<T>(m, p);
            for q in 0..m {
                let op = f.module.rank_one_operator(&ep, &linalg::basis_vector(m, q));
                theta_full.column_mut(p * m + q).copy_from_slice(op.as_slice());
            }
        }
        let scale = max_abs(&theta_full).max(1.0);
        checks.record(
            "theta-well-defined",
            "f·b ⊗ g* and f ⊗ b·g* give the same rank-one operator",
            relation_residual(&theta_full, &k),
            tol.threshold(scale),
            Kind::NotWellDefined,
        );
        let theta = T::gemm(&theta_full, &k.space.reps);
        let kdim = k.dim();
        checks.record(
            "theta-injective",
            "F ⊗_B F* → K_B(F) is injective",
            kdim.saturating_sub(linalg::rank(&theta, tol)) as f64,
            0.0,
            Kind::NotWellDefined,
        );

        let da = a.dim();
        let mut lam = CMat::zeros(m * m, da);
        for i in 0..da {
            lam.column_mut(i).copy_from_slice(f.left_action[i].as_slice());
        }
        let (eta, eta_res) = linalg::lstsq(&theta, &lam, tol);
        checks.record(
            "eta-lands-in-k",
            "the left action of A is by compact operators",
            eta_res,
            tol.threshold(max_abs(&lam).max(1.0)),
            Kind::TriangleIdentityFailure,
        );

        let db = b.dim();
        let mut eps_full = CMat::zeros(db, m * m);
        for p in 0..m {
            for q in 0..m {
                eps_full.column_mut(p * m + q).copy_from(&f.module.gram_entry(p, q));
            }
        }
        checks.record(
            "epsilon-well-defined",
            "f₁*·a ⊗ f₂ and f₁* ⊗ a·f₂ have the same inner product",
            relation_residual(&eps_full, &c),
            tol.threshold(max_abs(&eps_full).max(1.0)),
            Kind::NotWellDefined,
        );
        let eps = T::gemm(&eps_full, &c.space.reps);
        let unit = T::gemm(&k.space.reps, &T::gemm(&eta, &linalg::cvec_to_mat(a.unit())));
        let kappa = linalg::unvec(unit.as_slice(), m, m);

        let mut pair = AdjointPair {
            a,
            b,
            correspondence: f,
            l,
            r,
            k,
            c,
            eta,
            eps,
            theta,
            kappa,
            tol,
            checks: Checks::new(),
        };
        pair.bimodule_checks(&mut checks);
        pair.triangle_checks(&mut checks);
        checks.ensure()?;
        pair.checks = checks;
        Ok(pair)
    }

    /// The subalgebra pair `(_A B_B, _B B_A)` of a nondegenerate inclusion.
    pub fn from_inclusion(inc: &Inclusion<T>, tol: Tolerance) -> Result<Self> {
        Self::from_correspondence(Correspondence::from_inclusion(inc, tol)?, tol)
    }

    pub fn checks(&self) -> &Checks {
        &self.checks
    }

    /// Dimension of the correspondence `F`.
    pub fn m(&self) -> usize {
        self.correspondence.module.dim()
    }

    /// `ε` on full coordinates of `F* ⊗ F`.
    pub fn eps_full(&self) -> CMat<T> {
        T::gemm(&self.eps, &self.c.space.proj)
    }

    /// The operator on `F` attached to an element of `K`.
    pub fn operator(&self, k: &CVec<T>) -> CMat<T> {
        let m = self.m();
        let v = &self.theta * k;
        CMat::from_column_slice(m, m, v.as_slice())
    }

    fn bimodule_checks(&self, checks: &mut Checks) {
        let tol = self.tol;
        let kl = &self.k.bimodule.left.as_ref().expect("K has a left A-action").mats;
        let kr = &self.k.bimodule.right.as_ref().expect("K has a right A-action").mats;
        let mut res = 0.0f64;
        for i in 0..self.a.dim() {
            let la = self.a.left_mult(&self.a.basis_vector(i));
            let ra = self.a.right_mult(&self.a.basis_vector(i));
            res = res.max(max_abs(&(T::gemm(&kl[i], &self.eta) - T::gemm(&self.eta, &la))));
            res = res.max(max_abs(&(T::gemm(&kr[i], &self.eta) - T::gemm(&self.eta, &ra))));
        }
        checks.record(
            "eta-bimodule-map",
            "η(a₁ a a₂) = a₁·η(a)·a₂",
            res,
            tol.threshold(max_abs(&self.eta).max(1.0)),
            Kind::TriangleIdentityFailure,
        );
        let cl = &self.c.bimodule.left.as_ref().expect("C has a left B-action").mats;
        let cr = &self.c.bimodule.right.as_ref().expect("C has a right B-action").mats;
        let mut res = 0.0f64;
        for t in 0..self.b.dim() {
            let lb = self.b.left_mult(&self.b.basis_vector(t));
            let rb = self.b.right_mult(&self.b.basis_vector(t));
            res = res.max(max_abs(&(T::gemm(&self.eps, &cl[t]) - T::gemm(&lb, &self.eps))));
            res = res.max(max_abs(&(T::gemm(&self.eps, &cr[t]) - T::gemm(&rb, &self.eps))));
        }
        checks.record(
            "epsilon-bimodule-map",
            "ε(b₁ c b₂) = b₁ ε(c) b₂",
            res,
            tol.threshold(max_abs(&self.eps).max(1.0)),
            Kind::TriangleIdentityFailure,
        );
    }

    fn triangle_checks(&self, checks: &mut Checks) {
        let m = self.m();
        let ef = self.eps_full();
        let f = &self.correspondence;
        let rl = &self.r.left.as_ref().expect("R has a left B-action").mats;
        let e = |j: usize| ef.column(j).into_owned();
        let kappa = &self.kappa;

        // r ↦ (ε ⊗ id)(r ⊗ η(1)) on R = F*.
        let mut tri_r = CMat::zeros(m, m);
        for r in 0..m {
            let mut col = CVec::zeros(m);
            for p in 0..m {
                let act = crate::module::combine(rl, &e(r * m + p));
                col += act * kappa.row(p).transpose();
            }
            tri_r.set_column(r, &col);
        }
        // l ↦ (id ⊗ ε)(η(1) ⊗ l) on L = F.
        let mut tri_l = CMat::zeros(m, m);
        for l in 0..m {
            let mut col = CVec::zeros(m);
            for q in 0..m {
                let act = f.module.act(&e(q * m + l));
                col += act * kappa.column(q);
            }
            tri_l.set_column(l, &col);
        }
        let id = linalg::identity::<T>(m);
        checks.record(
            "triangle-r",
            "(ε ⊗ id_R)(id_R ⊗ η) = id_R",
            max_abs(&(tri_r - &id)),
            self.tol.threshold(1.0),
            Kind::TriangleIdentityFailure,
        );
        checks.record(
            "triangle-l",
            "(id_L ⊗ ε)(η ⊗ id_L) = id_L",
            max_abs(&(tri_l - &id)),
            self.tol.threshold(1.0),
            Kind::TriangleIdentityFailure,
        );
    }

    /// The subspace `{k : f₁* ⊗ k(f₂) = (k*(f₁))* ⊗ f₂ for all f₁, f₂}` of `K`.
    pub fn unit_image_subspace(&self) -> Result<Subspace<T>> {
        if !self.correspondence.faithful {
            return Err(Error::new(Kind::EtaNotFaithful, "η has a kernel"));
        }
        let m = self.m();
        let kdim = self.k.dim();
        let module = &self.correspondence.module;
        let cdim = self.c.dim();
        let mut cond = CMat::zeros(m * m * cdim, kdim);
        for s in 0..kdim {
            let op = self.operator(&linalg::basis_vector(kdim, s));
            let (adj, _) = module.operator_adjoint(module, &op);
            let mut col = CVec::zeros(m * m * cdim);
            for i in 0..m {
                for j in 0..m {
                    // f₁* ⊗ k f₂ − (k* f₁)* ⊗ f₂ with f₁ = e_i, f₂ = e_j.
                    let mut full = CVec::zeros(m * m);
                    let kf2 = op.column(j);
                    for q in 0..m {
                        full[i * m + q] += kf2[q];
                    }
                    let kf1 = adj.column(i);
                    for p in 0..m {
                        full[p * m + j] -= kf1[p].conj();
                    }
                    let v = &self.c.space.proj * full;
                    col.rows_mut((i * m + j) * cdim, cdim).copy_from(&v);
                }
            }
            cond.set_column(s, &col);
        }
        Ok(linalg::kernel(&cond, self.tol))
    }

    /// `image(η)` inside `K`.
    pub fn eta_image(&self) -> Subspace<T> {
        linalg::image(&self.eta, self.tol)
    }

    /// Coordinates of `a` with `η(a) = k`, or `None` when `k ∉ η(A)`.
    pub fn eta_preimage(&self, k: &CVec<T>) -> Option<CVec<T>> {
        let (x, res) = linalg::lstsq(&self.eta, &linalg::cvec_to_mat(k), self.tol);
        if res <= self.tol.threshold(max_abs(k).max(1.0)) {
            Some(x.column(0).into_owned())
        } else {
            None
        }
    }
}

/// How far a map given on full coordinates is from vanishing on the relations.
pub(crate) fn relation_residual<T: Real>(full_map: &CMat<T>, t: &Tensor<T>) -> f64 {
    if t.space.relations.ncols() == 0 {
        0.0
    } else {
        max_abs(&T::gemm(full_map, &t.space.relations))
    }
}

/// `K` with the product `μ(l₁⊗r₁, l₂⊗r₂) = l₁ ε(r₁⊗l₂) ⊗ r₂`.
#[derive(Clone, Debug)]
pub struct KAlgebra<T: Real> {
    /// Left multiplication by each quotient basis vector.
    pub lmul: Vec<CMat<T>>,
    /// `η(1)`.
    pub unit: CVec<T>,
    pub checks: Checks,
}

impl<T: Real> KAlgebra<T> {
    pub fn multiply(&self, x: &CVec<T>, y: &CVec<T>) -> CVec<T> {
        crate::module::combine(&self.lmul, x) * y
    }
}

/// Product on `K` computed from representatives, with its structural checks.
pub fn k_algebra<T: Real>(pair: &AdjointPair<T>) -> Result<KAlgebra<T>> {
    let m = pair.m();
    let kdim = pair.k.dim();
    let db = pair.b.dim();
    let ef = pair.eps_full();
    let e_t: Vec<CMat<T>> = (0..db).map(|t| linalg::unvec(ef.row(t).transpose().as_slice(), m, m)).collect();
    let rho = pair.correspondence.module.action();
    let reps = &pair.k.space.reps;
    let lifts: Vec<CMat<T>> = (0..kdim).map(|s| linalg::unvec(reps.column(s).as_slice(), m, m)).collect();
    let product = |k1: &CMat<T>, k2: &CMat<T>| -> CVec<T> {
        let mut res = CMat::zeros(m, m);
        for (rt, et) in rho.iter().zip(e_t.iter()) {
            res += rt * k1 * et * k2;
        }
        &pair.k.space.proj * linalg::vec_rows(&res)
    };
    let mut lmul = vec![CMat::zeros(kdim, kdim); kdim];
    for (p, lp) in lmul.iter_mut().enumerate() {
        for q in 0..kdim {
            lp.set_column(q, &product(&lifts[p], &lifts[q]));
        }
    }
    let tol = pair.tol;
    let mut checks = Checks::new();
    let ops: Vec<CMat<T>> = (0..kdim).map(|s| pair.operator(&linalg::basis_vector(kdim, s))).collect();
    let scale = ops.iter().map(max_abs).fold(1.0, f64::max);
    let mut comp = 0.0f64;
    for p in 0..kdim {
        for q in 0..kdim {
            let prod = pair.operator(&lmul[p].column(q).into_owned());
            comp = comp.max(max_abs(&(prod - &ops[p] * &ops[q])));
        }
    }
    checks.record(
        "mu-matches-composition",
        "θ(μ(k₁, k₂)) = θ(k₁) ∘ θ(k₂)",
        comp,
        tol.threshold(scale * scale),
        Kind::AssociativityFailure,
    );
    let k = KAlgebra { lmul, unit: pair.eta.clone() * pair.a.unit(), checks: Checks::new() };
    let mut assoc = 0.0f64;
    for probe in 0..3 {
        let x = probe_vector::<T>(kdim, 3 * probe);
        let y = probe_vector::<T>(kdim, 3 * probe + 1);
        let z = probe_vector::<T>(kdim, 3 * probe + 2);
        let lhs = k.multiply(&k.multiply(&x, &y), &z);
        let rhs = k.multiply(&x, &k.multiply(&y, &z));
        assoc = assoc.max(max_abs(&(lhs - rhs)));
    }
    checks.record(
        "mu-associative",
        "μ(μ(x, y), z) = μ(x, μ(y, z))",
        assoc,
        tol.threshold(scale.powi(3) * kdim as f64),
        Kind::AssociativityFailure,
    );
    let a = &pair.a;
    let mut mult = 0.0f64;
    for i in 0..a.dim() {
        let ei = pair.eta.column(i).into_owned();
        for j in 0..a.dim() {
            let ej = pair.eta.column(j).into_owned();
            let ab = a.multiply(&a.basis_vector(i), &a.basis_vector(j));
            mult = mult.max(max_abs(&(k.multiply(&ei, &ej) - &pair.eta * ab)));
        }
    }
    checks.record(
        "eta-multiplicative",
        "η(a₁a₂) = μ(η(a₁), η(a₂))",
        mult,
        tol.threshold(scale * scale),
        Kind::AssociativityFailure,
    );
    let mut unit_res = 0.0f64;
    for s in 0..kdim {
        let e = linalg::basis_vector::<T>(kdim, s);
        unit_res = unit_res.max(max_abs(&(k.multiply(&k.unit, &e) - &e)));
        unit_res = unit_res.max(max_abs(&(k.multiply(&e, &k.unit) - &e)));
    }
    checks.record(
        "eta-unit-is-identity",
        "η(1) is a two-sided identity for μ",
        unit_res,
        tol.threshold(scale),
        Kind::AssociativityFailure,
    );
    checks.ensure()?;
    Ok(KAlgebra { checks, ..k })
}

/// Fixed, well-spread test vector used for probing identities.
pub(crate) fn probe_vector<T: Real>(n: usize, seed: usize) -> CVec<T> {
    CVec::from_iterator(
        n,
        (0..n).map(|i| {
            let t = (i * 7 + seed * 13 + 1) as f64;
            crate::scalar::cx((t * 0.618_034).sin(), (t * 0.414_214).cos())
        }),
    )
}
