//! The coalgebra `C = R ⊗_A L` of an adjoint pair.

use crate::error::Result;
use crate::error::Kind;
use crate::linalg::{self, kron_apply, max_abs, Tolerance};
use crate::module::combine;
use crate::pair::{relation_residual, AdjointPair};
use crate::report::Checks;
use crate::scalar::{CMat, Real};
use crate::tensor::{balanced_tensor, Tensor};
use std::sync::Arc;

/// `C = F* ⊗_A F` with `δ = id_R ⊗ η ⊗ id_L` and `ε(f₁* ⊗ f₂) = ⟨f₁|f₂⟩`.
#[derive(Clone, Debug)]
pub struct Coalgebra<T: Real> {
    pub pair: Arc<AdjointPair<T>>,
    /// `C ⊗_B C`.
    pub cc: Tensor<T>,
    /// `δ: C → C ⊗_B C` in quotient coordinates.
    pub delta: CMat<T>,
    /// `c* = star · conj(c)` on quotient coordinates of `C`.
    pub star: CMat<T>,
    /// The swap involution `(c₁ ⊗ c₂)* = c₂* ⊗ c₁*` on `C ⊗_B C`.
    pub star_cc: CMat<T>,
    pub tol: Tolerance,
    checks: Checks,
}

impl<T: Real> Coalgebra<T> {
    /// Builds `δ`, `ε` and the involution, and verifies every coalgebra axiom.
    pub fn build(pair: Arc<AdjointPair<T>>) -> Result<Self> {
        let tol = pair.tol;
        let c = &pair.c;
        let m = pair.m();
        let cdim = c.dim();
        let cc = balanced_tensor(&c.bimodule, &c.bimodule, tol)?;
        let kappa = &pair.kappa;
        let mut checks = Checks::new();

        let mut delta_raw = CMat::zeros(cc.space.full_dim(), m * m);
        for i in 0..m {
            let u = c.space.proj.columns(i * m, m).into_owned();
            let uk = &u * kappa;
            for j in 0..m {
                let mut v = CMat::zeros(cdim, m);
                for q in 0..m {
                    v.set_column(q, &c.space.proj.column(q * m + j));
                }
                let w = &uk * v.transpose();
                delta_raw.set_column(i * m + j, &linalg::vec_rows(&w));
            }
        }
        let delta_full = cc.space.project(&delta_raw);
        checks.record(
            "delta-well-defined",
            "η inserted in the middle respects the A-balancing",
            relation_residual(&delta_full, c),
            tol.threshold(max_abs(&delta_full).max(1.0)),
            Kind::NotWellDefined,
        );
        let delta = T::gemm(&delta_full, &c.space.reps);

        let swap = swap_matrix::<T>(m, m);
        let star = &c.space.proj * &swap * c.space.reps.conjugate();
        let star_cc = &cc.space.proj
            * linalg::kron(&star, &star)
            * swap_matrix::<T>(cdim, cdim)
            * cc.space.reps.conjugate();

        let co = Coalgebra { pair: pair.clone(), cc, delta, star, star_cc, tol, checks: Checks::new() };
        co.verify(&mut checks)?;
        checks.ensure()?;
        Ok(Coalgebra { checks, ..co })
    }

    pub fn checks(&self) -> &Checks {
        &self.checks
    }

    pub fn c(&self) -> &Tensor<T> {
        &self.pair.c
    }

    pub fn dim(&self) -> usize {
        self.pair.c.dim()
    }

    pub fn eps(&self) -> &CMat<T> {
        &self.pair.eps
    }

    /// `λ_C(ε(c)) c'` summed as the map `C ⊗ C → C` in full coordinates, and the mirrored
    /// `c ρ_C(ε(c'))`: the two unit-module identifications `B ⊗_B C ≅ C ≅ C ⊗_B B`.
    pub fn counit_contractions(&self) -> (CMat<T>, CMat<T>) {
        let c = self.c();
        let n = c.dim();
        let left = &c.bimodule.left.as_ref().expect("C has a left action").mats;
        let right = &c.bimodule.right.as_ref().expect("C has a right action").mats;
        let mut el = CMat::zeros(n, n * n);
        let mut er = CMat::zeros(n, n * n);
        for a in 0..n {
            let ea = self.pair.eps.column(a).into_owned();
            let la = combine(left, &ea);
            let ra = combine(right, &ea);
            for b in 0..n {
                el.set_column(a * n + b, &la.column(b));
                er.set_column(b * n + a, &ra.column(b));
            }
        }
        (el, er)
    }

    fn verify(&self, checks: &mut Checks) -> Result<()> {
        let tol = self.tol;
        let c = self.c();
        let n = c.dim();
        let scale = max_abs(&self.delta).max(1.0);
        let id = linalg::identity::<T>(n);

        let (el, er) = self.counit_contractions();
        let lifted = T::gemm(&self.cc.space.reps, &self.delta);
        checks.record(
            "counit-left",
            "(ε ⊗ id)δ = id",
            max_abs(&(T::gemm(&el, &lifted) - &id)),
            tol.threshold(scale),
            Kind::CounitFailure,
        );
        checks.record(
            "counit-right",
            "(id ⊗ ε)δ = id",
            max_abs(&(T::gemm(&er, &lifted) - &id)),
            tol.threshold(scale),
            Kind::CounitFailure,
        );
        let (el_rel, er_rel) = (relation_residual(&el, &self.cc), relation_residual(&er, &self.cc));
        checks.record(
            "counit-contraction-well-defined",
            "b·c ⊗ c' and c ⊗ b·c' contract identically",
            el_rel.max(er_rel),
            tol.threshold(max_abs(&el).max(1.0)),
            Kind::NotWellDefined,
        );

        let ccc = balanced_tensor(&self.cc.bimodule, &c.bimodule, tol)?;
        let lhs = ccc.space.project(&kron_apply(&self.delta, &id, &lifted));
        let inner = T::gemm(&self.cc.space.reps, &self.delta);
        let right = kron_apply(&id, &inner, &lifted);
        let rhs = ccc.space.project(&kron_apply(&self.cc.space.proj, &id, &right));
        checks.record(
            "coassociative",
            "(δ ⊗ id)δ = (id ⊗ δ)δ",
            max_abs(&(lhs - rhs)),
            tol.threshold(scale * scale),
            Kind::CoassociativityFailure,
        );

        let pair = &self.pair;
        let cl = &c.bimodule.left.as_ref().expect("C has a left action").mats;
        let cr = &c.bimodule.right.as_ref().expect("C has a right action").mats;
        let ccl = &self.cc.bimodule.left.as_ref().expect("C⊗C has a left action").mats;
        let ccr = &self.cc.bimodule.right.as_ref().expect("C⊗C has a right action").mats;
        let mut bim = 0.0f64;
        for t in 0..pair.b.dim() {
            bim = bim.max(max_abs(&(&self.delta * &cl[t] - &ccl[t] * &self.delta)));
            bim = bim.max(max_abs(&(&self.delta * &cr[t] - &ccr[t] * &self.delta)));
        }
        checks.record(
            "delta-bimodule-map",
            "δ(b₁ c b₂) = b₁ δ(c) b₂",
            bim,
            tol.threshold(scale * scale),
            Kind::CoassociativityFailure,
        );

        checks.record(
            "star-involutive",
            "c** = c",
            max_abs(&(&self.star * self.star.conjugate() - &id)),
            tol.threshold(1.0),
            Kind::StarFailure,
        );
        checks.record(
            "star-delta",
            "δ(c*) = δ(c)*",
            max_abs(&(&self.delta * &self.star - &self.star_cc * self.delta.conjugate())),
            tol.threshold(scale * scale),
            Kind::StarFailure,
        );
        let sb = pair.b.star_matrix();
        checks.record(
            "star-epsilon",
            "ε(c*) = ε(c)*",
            max_abs(&(&pair.eps * &self.star - sb * pair.eps.conjugate())),
            tol.threshold(max_abs(&pair.eps).max(1.0)),
            Kind::StarFailure,
        );
        Ok(())
    }

    /// `c*` for quotient coordinates `c`.
    pub fn involute(&self, c: &crate::scalar::CVec<T>) -> crate::scalar::CVec<T> {
        &self.star * c.conjugate()
    }
}

/// Permutation sending full coordinate `(i, j)` of `C^p ⊗ C^q` to `(j, i)` of `C^q ⊗ C^p`.
pub fn swap_matrix<T: Real>(p: usize, q: usize) -> CMat<T> {
    let mut s = CMat::zeros(p * q, p * q);
    for i in 0..p {
        for j in 0..q {
            s[(j * p + i, i * q + j)] = crate::algebra::one();
        }
    }
    s
}
