//! Hilbert C*-modules, bimodule structures, correspondences and compact operators.

use crate::algebra::{one, AlgebraRef, FiniteCStarAlgebra};
use crate::error::{shape, Error, Kind, Result};
use crate::linalg::{self, max_abs, Tolerance};
use crate::report::Checks;
use crate::scalar::{f64_of, CMat, CVec, Real};
use num_traits::Zero;
use std::sync::Arc;

/// Action of an algebra by matrices, one per basis element.
#[derive(Clone, Debug)]
pub struct Action<T: Real> {
    pub algebra: AlgebraRef<T>,
    pub mats: Vec<CMat<T>>,
}

impl<T: Real> Action<T> {
    /// Matrix of the action of an element with coordinates `x`.
    pub fn of(&self, x: &CVec<T>) -> CMat<T> {
        combine(&self.mats, x)
    }
}

pub(crate) fn combine<T: Real>(mats: &[CMat<T>], x: &CVec<T>) -> CMat<T> {
    let (r, c) = mats.first().map(|m| m.shape()).unwrap_or((0, 0));
    let mut out = CMat::zeros(r, c);
    for (m, xi) in mats.iter().zip(x.iter()) {
        if !xi.is_zero() {
            out += m * *xi;
        }
    }
    out
}

/// A finite-dimensional space with optional left and right algebra actions.
///
/// Left actions compose as `λ(b₁b₂) = λ(b₁)λ(b₂)`, right actions as `ρ(b₁b₂) = ρ(b₂)ρ(b₁)`.
#[derive(Clone, Debug)]
pub struct Bimodule<T: Real> {
    pub dim: usize,
    pub left: Option<Action<T>>,
    pub right: Option<Action<T>>,
}

impl<T: Real> Bimodule<T> {
    /// The adjoint bimodule `X*` in conjugate coordinates, with `b·x*·a = (a* x b*)*`.
    pub fn adjoint(&self) -> Bimodule<T> {
        let flip = |act: &Action<T>| {
            let s = act.algebra.star_matrix();
            let mats = (0..act.algebra.dim())
                .map(|k| combine(&act.mats, &s.column(k).into_owned()).conjugate())
                .collect();
            Action { algebra: act.algebra.clone(), mats }
        };
        Bimodule {
            dim: self.dim,
            left: self.right.as_ref().map(flip),
            right: self.left.as_ref().map(flip),
        }
    }
}

/// Right Hilbert module over `B` with `B`-valued inner product.
///
/// `gram[t][(i, j)]` is coordinate `t` of `⟨e_i|e_j⟩`.
#[derive(Clone, Debug)]
pub struct HilbertModule<T: Real> {
    algebra: AlgebraRef<T>,
    dim: usize,
    action: Vec<CMat<T>>,
    gram: Vec<CMat<T>>,
    weight: CMat<T>,
    tol: Tolerance,
    checks: Checks,
}

impl<T: Real> HilbertModule<T> {
    pub fn validate(
        algebra: AlgebraRef<T>,
        action: Vec<CMat<T>>,
        gram: Vec<CMat<T>>,
        tol: Tolerance,
    ) -> Result<Self> {
        let d = algebra.dim();
        if action.len() != d || gram.len() != d {
            return Err(shape(format!(
                "module data for {} basis elements, algebra has {d}",
                action.len().min(gram.len())
            )));
        }
        let m = action.first().map(|a| a.nrows()).unwrap_or(0);
        if action.iter().chain(gram.iter()).any(|a| a.shape() != (m, m)) {
            return Err(shape("action and Gram matrices must all be m x m"));
        }
        let mut checks = Checks::new();
        let id = linalg::identity::<T>(m);
        let scale = action.iter().chain(gram.iter()).map(max_abs).fold(1.0, f64::max);

        let unit_res = max_abs(&(combine(&action, algebra.unit()) - &id));
        let mut hom = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let prod = algebra.left_regular(i).column(j).into_owned();
                let lhs = combine(&action, &prod);
                hom = hom.max(max_abs(&(lhs - &action[j] * &action[i])));
            }
        }
        checks.record(
            "action-unital",
            "the unit acts as the identity",
            unit_res,
            tol.threshold(1.0),
            Kind::ActionNotHomomorphic,
        );
        checks.record(
            "action-homomorphic",
            "x·(b₁b₂) = (x·b₁)·b₂",
            hom,
            tol.threshold(scale * scale),
            Kind::ActionNotHomomorphic,
        );

        let s = algebra.star_matrix();
        let mut herm = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let gij = entry(&gram, i, j);
                let gji = entry(&gram, j, i);
                herm = herm.max(max_abs(&(gji - s * gij.conjugate())));
            }
        }
        let mut sesq = 0.0f64;
        for k in 0..d {
            let r = algebra.right_mult(&algebra.basis_vector(k));
            for t in 0..d {
                let lhs = &gram[t] * &action[k];
                let rhs = combine(&gram, &r.row(t).transpose());
                sesq = sesq.max(max_abs(&(lhs - rhs)));
            }
        }
        checks.record(
            "inner-product-symmetric",
            "⟨x|y⟩* = ⟨y|x⟩",
            herm,
            tol.threshold(scale),
            Kind::InnerProductNotSesquilinear,
        );
        checks.record(
            "inner-product-linear",
            "⟨x|y·b⟩ = ⟨x|y⟩b",
            sesq,
            tol.threshold(scale * scale),
            Kind::InnerProductNotSesquilinear,
        );
        checks.ensure()?;

        let block = block_gram(&algebra, &gram);
        let min_block = linalg::min_eigenvalue(&block);
        checks.record(
            "positive",
            "[⟨e_i|e_j⟩] is positive semidefinite",
            (-min_block).max(0.0),
            tol.threshold(max_abs(&block)),
            Kind::NotPositive,
        );
        checks.ensure()?;

        let traces = algebra.traces();
        let mut weight = CMat::zeros(m, m);
        for (g, tr) in gram.iter().zip(traces.iter()) {
            weight += g * *tr;
        }
        let weight = linalg::hermitian_part(&weight);
        let (w, _) = T::eigh(&weight);
        let wmin = w.first().map(|x| f64_of(*x)).unwrap_or(1.0);
        let wmax = w.last().map(|x| f64_of(*x)).unwrap_or(1.0);
        checks.record(
            "definite",
            "⟨x|x⟩ = 0 only for x = 0",
            if m == 0 || wmin > tol.threshold(wmax) { 0.0 } else { 1.0 },
            0.0,
            Kind::DegenerateInnerProduct,
        );
        checks.ensure()?;
        Ok(HilbertModule { algebra, dim: m, action, gram, weight, tol, checks })
    }

    /// `B` as a right module over itself with `⟨b₁|b₂⟩ = b₁*b₂`.
    pub fn over_itself(algebra: AlgebraRef<T>, tol: Tolerance) -> Result<Self> {
        let d = algebra.dim();
        let action = (0..d).map(|k| algebra.right_mult(&algebra.basis_vector(k))).collect();
        let mut gram = vec![CMat::zeros(d, d); d];
        for i in 0..d {
            let si = algebra.involute(&algebra.basis_vector(i));
            for j in 0..d {
                let g = algebra.multiply(&si, &algebra.basis_vector(j));
                for (t, gt) in gram.iter_mut().enumerate() {
                    gt[(i, j)] = g[t];
                }
            }
        }
        Self::validate(algebra, action, gram, tol)
    }

    /// The right ideal `pB` for a projection `p`.
    pub fn from_projection(algebra: AlgebraRef<T>, p: &CVec<T>, tol: Tolerance) -> Result<Self> {
        let b = Self::over_itself(algebra.clone(), tol)?;
        let range = linalg::image(&algebra.left_mult(p), tol);
        b.submodule(&range.basis)
    }

    /// `C^n` over the one-dimensional algebra `C` with the standard inner product.
    pub fn column(n: usize, tol: Tolerance) -> Result<Self> {
        let c = Arc::new(FiniteCStarAlgebra::scalars(1, tol)?);
        Self::validate(c, vec![linalg::identity(n)], vec![linalg::identity(n)], tol)
    }

    /// Row vectors `C^n` as a right module over `M_n` with `⟨x|y⟩ = x*y`.
    pub fn row(mn: AlgebraRef<T>, tol: Tolerance) -> Result<Self> {
        let n = mn.ambient_dim();
        if mn.dim() != n * n {
            return Err(shape("row module needs the full matrix algebra"));
        }
        let mut action = Vec::with_capacity(n * n);
        let mut gram = vec![CMat::zeros(n, n); n * n];
        for k in 0..n * n {
            let e = mn.basis()[k].clone();
            // Row vector x times e: coordinates transform by eᵀ.
            action.push(e.transpose());
        }
        for i in 0..n {
            for j in 0..n {
                let mut outer = CMat::zeros(n, n);
                outer[(i, j)] = one();
                let c = mn.coords(&outer).ok_or_else(|| shape("matrix unit outside algebra"))?;
                for (t, gt) in gram.iter_mut().enumerate() {
                    gt[(i, j)] = c[t];
                }
            }
        }
        Self::validate(mn, action, gram, tol)
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(parts: &[&HilbertModule<T>]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| shape("empty direct sum"))?;
        let algebra = first.algebra.clone();
        let d = algebra.dim();
        let m: usize = parts.iter().map(|p| p.dim).sum();
        let mut action = vec![CMat::zeros(m, m); d];
        let mut gram = vec![CMat::zeros(m, m); d];
        let mut at = 0;
        for p in parts {
            if !p.algebra.same_shape(&algebra) {
                return Err(shape("direct summands over different algebras"));
            }
            for k in 0..d {
                action[k].view_mut((at, at), (p.dim, p.dim)).copy_from(&p.action[k]);
                gram[k].view_mut((at, at), (p.dim, p.dim)).copy_from(&p.gram[k]);
            }
            at += p.dim;
        }
        Self::validate(algebra, action, gram, first.tol)
    }

    /// Restriction to an invariant subspace spanned by the orthonormal columns of `v`.
    pub fn submodule(&self, v: &CMat<T>) -> Result<Self> {
        let proj = v * v.adjoint();
        let mut action = Vec::with_capacity(self.action.len());
        for a in &self.action {
            let av = a * v;
            if max_abs(&(&av - &proj * &av)) > self.tol.threshold(max_abs(a).max(1.0)) {
                return Err(Error::new(Kind::NotASubmodule, "subspace not invariant under B"));
            }
            action.push(v.adjoint() * av);
        }
        let gram = self.gram.iter().map(|g| v.adjoint() * g * v).collect();
        Self::validate(self.algebra.clone(), action, gram, self.tol)
    }

    pub fn algebra(&self) -> &AlgebraRef<T> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn action(&self) -> &[CMat<T>] {
        &self.action
    }

    pub fn gram(&self) -> &[CMat<T>] {
        &self.gram
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn checks(&self) -> &Checks {
        &self.checks
    }

    /// Right action of an algebra element.
    pub fn act(&self, b: &CVec<T>) -> CMat<T> {
        combine(&self.action, b)
    }

    /// `⟨e_i|e_j⟩` in algebra coordinates.
    pub fn gram_entry(&self, i: usize, j: usize) -> CVec<T> {
        entry(&self.gram, i, j)
    }

    pub fn inner(&self, x: &CVec<T>, y: &CVec<T>) -> CVec<T> {
        let xh = x.adjoint();
        CVec::from_iterator(self.gram.len(), self.gram.iter().map(|g| (&xh * g * y)[(0, 0)]))
    }

    /// C*-module norm `‖⟨x|x⟩‖^{1/2}`.
    pub fn norm(&self, x: &CVec<T>) -> f64 {
        self.algebra.norm(&self.inner(x, x)).sqrt()
    }

    /// `W` with `xᴴ W y = τ(⟨x|y⟩)` for the ambient trace τ; positive definite.
    pub fn weight(&self) -> &CMat<T> {
        &self.weight
    }

    /// Block matrix `[rep⟨e_i|e_j⟩]`.
    pub fn block_gram(&self) -> CMat<T> {
        block_gram(&self.algebra, &self.gram)
    }

    pub fn as_bimodule(&self) -> Bimodule<T> {
        Bimodule {
            dim: self.dim,
            left: None,
            right: Some(Action { algebra: self.algebra.clone(), mats: self.action.clone() }),
        }
    }

    /// Matrix of the rank-one operator `θ_{f,g}: h ↦ f·⟨g|h⟩`.
    pub fn rank_one_operator(&self, f: &CVec<T>, g: &CVec<T>) -> CMat<T> {
        let mut op = CMat::zeros(self.dim, self.dim);
        for l in 0..self.dim {
            let c = self.inner(g, &linalg::basis_vector(self.dim, l));
            op.set_column(l, &(self.act(&c) * f));
        }
        op
    }

    /// Module adjoint of an operator `t: self → other`, if it exists.
    pub fn operator_adjoint(&self, other: &HilbertModule<T>, t: &CMat<T>) -> (CMat<T>, f64) {
        // ⟨t x|y⟩ = ⟨x|t* y⟩ in every coordinate: tᴴ G'_k = G_k t*.
        let winv = linalg::pinv(&self.weight, self.tol);
        let ts = winv * t.adjoint() * &other.weight;
        let mut res = 0.0f64;
        for (g, g2) in self.gram.iter().zip(other.gram.iter()) {
            res = res.max(max_abs(&(t.adjoint() * g2 - g * &ts)));
        }
        (ts, res)
    }

    /// Whether `t` commutes with the right action.
    pub fn linearity_residual(&self, other: &HilbertModule<T>, t: &CMat<T>) -> f64 {
        self.action
            .iter()
            .zip(other.action.iter())
            .map(|(a, b)| max_abs(&(t * a - b * t)))
            .fold(0.0, f64::max)
    }

    /// Largest difference between the Gram data of `self` and of `other` pulled back
    /// along `t: self → other`.
    pub fn isometry_residual(&self, other: &HilbertModule<T>, t: &CMat<T>) -> f64 {
        self.gram
            .iter()
            .zip(other.gram.iter())
            .map(|(g, g2)| max_abs(&(t.adjoint() * g2 * t - g)))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn entry<T: Real>(gram: &[CMat<T>], i: usize, j: usize) -> CVec<T> {
    CVec::from_iterator(gram.len(), gram.iter().map(|g| g[(i, j)]))
}

fn block_gram<T: Real>(algebra: &FiniteCStarAlgebra<T>, gram: &[CMat<T>]) -> CMat<T> {
    let m = gram.first().map(|g| g.nrows()).unwrap_or(0);
    let n = algebra.ambient_dim();
    let mut out = CMat::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..m {
            let r = algebra.rep(&entry(gram, i, j));
            out.view_mut((i * n, j * n), (n, n)).copy_from(&r);
        }
    }
    out
}

/// `K_B(F)` in the trace-orthonormal coordinates of `F`, where module adjoints become
/// conjugate transposes, so it is a concretely represented C*-algebra.
#[derive(Clone, Debug)]
pub struct Compacts<T: Real> {
    pub algebra: AlgebraRef<T>,
    w_sqrt: CMat<T>,
    w_inv_sqrt: CMat<T>,
}

impl<T: Real> Compacts<T> {
    pub fn of(f: &HilbertModule<T>) -> Result<Self> {
        let tol = f.tol;
        let m = f.dim;
        let w_sqrt = linalg::hermitian_function(&f.weight, |x| x.max(0.0).sqrt());
        let w_inv_sqrt = linalg::hermitian_function(&f.weight, |x| 1.0 / x.sqrt());
        let mut stack = CMat::zeros(m * m, m * m);
        for i in 0..m {
            for j in 0..m {
                let th = f.rank_one_operator(
                    &linalg::basis_vector(m, i),
                    &linalg::basis_vector(m, j),
                );
                let w = &w_sqrt * th * &w_inv_sqrt;
                stack.set_column(i * m + j, &CVec::from_column_slice(w.as_slice()));
            }
        }
        let span = linalg::image(&stack, tol);
        let basis = (0..span.dim())
            .map(|k| CMat::from_column_slice(m, m, span.basis.column(k).as_slice()))
            .collect();
        let algebra = Arc::new(FiniteCStarAlgebra::validate(basis, tol)?);
        Ok(Compacts { algebra, w_sqrt, w_inv_sqrt })
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// The operator on `F` (module coordinates) with compact coordinates `k`.
    pub fn operator(&self, k: &CVec<T>) -> CMat<T> {
        &self.w_inv_sqrt * self.algebra.rep(k) * &self.w_sqrt
    }

    /// Coordinates of an operator on `F`, or `None` if it is not adjointable.
    pub fn coords(&self, op: &CMat<T>) -> Option<CVec<T>> {
        self.algebra.coords(&(&self.w_sqrt * op * &self.w_inv_sqrt))
    }

    pub fn rank_one(&self, f: &HilbertModule<T>, x: &CVec<T>, y: &CVec<T>) -> Option<CVec<T>> {
        self.coords(&f.rank_one_operator(x, y))
    }
}

/// A Hilbert `B`-module with a left action of `A` by adjointable operators.
#[derive(Clone, Debug)]
pub struct Correspondence<T: Real> {
    pub left_algebra: AlgebraRef<T>,
    pub module: HilbertModule<T>,
    pub left_action: Vec<CMat<T>>,
    pub compacts: Compacts<T>,
    /// The action map `A → K_B(F)` in compact coordinates.
    pub eta: CMat<T>,
    pub faithful: bool,
    checks: Checks,
}

impl<T: Real> Correspondence<T> {
    pub fn new(
        left_algebra: AlgebraRef<T>,
        module: HilbertModule<T>,
        left_action: Vec<CMat<T>>,
        tol: Tolerance,
    ) -> Result<Self> {
        let (da, m) = (left_algebra.dim(), module.dim());
        if left_action.len() != da || left_action.iter().any(|a| a.shape() != (m, m)) {
            return Err(shape("left action needs one m x m matrix per basis element of A"));
        }
        let mut checks = Checks::new();
        let scale = left_action.iter().map(max_abs).fold(1.0, f64::max);
        let mut comm = 0.0f64;
        for l in &left_action {
            for r in module.action() {
                comm = comm.max(max_abs(&(l * r - r * l)));
            }
        }
        checks.record(
            "actions-commute",
            "(a·f)·b = a·(f·b)",
            comm,
            tol.threshold(scale * scale),
            Kind::ActionsDoNotCommute,
        );
        let mut hom = 0.0f64;
        for i in 0..da {
            for j in 0..da {
                let p = left_algebra.left_regular(i).column(j).into_owned();
                hom = hom.max(max_abs(&(combine(&left_action, &p) - &left_action[i] * &left_action[j])));
            }
        }
        checks.record(
            "left-action-homomorphic",
            "(a₁a₂)·f = a₁·(a₂·f)",
            hom,
            tol.threshold(scale * scale),
            Kind::NotHomomorphism,
        );
        let s = left_algebra.star_matrix();
        let mut adj = 0.0f64;
        for i in 0..da {
            let star_op = combine(&left_action, &s.column(i).into_owned());
            for g in module.gram() {
                adj = adj.max(max_abs(&(left_action[i].adjoint() * g - g * &star_op)));
            }
        }
        checks.record(
            "left-action-adjointable",
            "⟨a·f₁|f₂⟩ = ⟨f₁|a*·f₂⟩",
            adj,
            tol.threshold(scale),
            Kind::LeftActionNotAdjointable,
        );
        let unit_res = max_abs(&(combine(&left_action, left_algebra.unit()) - linalg::identity::<T>(m)));
        checks.record(
            "left-action-nondegenerate",
            "1_A acts as the identity",
            unit_res,
            tol.threshold(1.0),
            Kind::Degenerate,
        );
        checks.ensure()?;

        let compacts = Compacts::of(&module)?;
        let mut eta = CMat::zeros(compacts.dim(), da);
        for (i, l) in left_action.iter().enumerate() {
            let c = compacts.coords(l).ok_or_else(|| {
                Error::new(Kind::LeftActionNotAdjointable, "left action outside K_B(F)")
            })?;
            eta.set_column(i, &c);
        }
        let faithful = linalg::rank(&eta, tol) == da;
        Ok(Correspondence { left_algebra, module, left_action, compacts, eta, faithful, checks })
    }

    /// The algebra itself acting on `B` by left multiplication through an inclusion.
    pub fn from_inclusion(inc: &crate::algebra::Inclusion<T>, tol: Tolerance) -> Result<Self> {
        let module = HilbertModule::over_itself(inc.amb.clone(), tol)?;
        let left = (0..inc.sub.dim())
            .map(|i| inc.amb.left_mult(&inc.embed(&inc.sub.basis_vector(i))))
            .collect();
        Self::new(inc.sub.clone(), module, left, tol)
    }

    pub fn checks(&self) -> &Checks {
        &self.checks
    }

    pub fn left(&self, a: &CVec<T>) -> CMat<T> {
        combine(&self.left_action, a)
    }

    /// `F` as an `A`-`B` bimodule.
    pub fn bimodule(&self) -> Bimodule<T> {
        Bimodule {
            dim: self.module.dim(),
            left: Some(Action { algebra: self.left_algebra.clone(), mats: self.left_action.clone() }),
            right: Some(Action { algebra: self.module.algebra().clone(), mats: self.module.action().to_vec() }),
        }
    }
}
