//! Finite-dimensional C*-algebras as *-closed unital matrix algebras, and inclusions.

use crate::error::{shape, Error, Kind, Result};
use crate::linalg::{self, max_abs, rank, Tolerance};
use crate::report::Checks;
use crate::scalar::{cx, CMat, CVec, Real};
use num_complex::Complex;
use num_traits::{One, Zero};
use std::sync::Arc;

/// A *-closed matrix algebra given by a basis, with structure constants and unit.
#[derive(Clone, Debug)]
pub struct FiniteCStarAlgebra<T: Real> {
    ambient: usize,
    basis: Vec<CMat<T>>,
    basis_mat: CMat<T>,
    coord_map: CMat<T>,
    lreg: Vec<CMat<T>>,
    star: CMat<T>,
    unit: CVec<T>,
    tol: Tolerance,
    checks: Checks,
}

pub type AlgebraRef<T> = Arc<FiniteCStarAlgebra<T>>;

fn vec_col<T: Real>(m: &CMat<T>) -> CVec<T> {
    CVec::from_column_slice(m.as_slice())
}

impl<T: Real> FiniteCStarAlgebra<T> {
    /// Validate a basis: independence, closure under products and adjoints, and a unit.
    pub fn validate(basis: Vec<CMat<T>>, tol: Tolerance) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(shape("empty basis"));
        }
        let n = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(shape("basis matrices must share one square shape"));
        }
        if basis.iter().any(|b| !linalg::is_finite(b)) {
            return Err(shape("non-finite basis entry"));
        }
        let mut basis_mat = CMat::zeros(n * n, d);
        for (j, b) in basis.iter().enumerate() {
            basis_mat.column_mut(j).copy_from_slice(b.as_slice());
        }
        let r = rank(&basis_mat, tol);
        if r < d {
            return Err(Error::new(
                Kind::LinearlyDependentBasis,
                format!("rank {r} for {d} basis matrices"),
            ));
        }
        let coord_map = linalg::pinv(&basis_mat, tol);
        let scale = basis.iter().map(max_abs).fold(0.0, f64::max).max(1.0);
        let mut checks = Checks::new();

        let mut lreg = vec![CMat::zeros(d, d); d];
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let p = vec_col(&(&basis[i] * &basis[j]));
                let c = &coord_map * &p;
                worst = worst.max(max_abs(&(&basis_mat * &c - &p)));
                lreg[i].set_column(j, &c);
            }
        }
        checks.record(
            "product-closure",
            "products of basis elements lie in the span",
            worst,
            tol.threshold(scale * scale),
            Kind::NotMultiplicativelyClosed,
        );
        checks.ensure()?;

        let mut star = CMat::zeros(d, d);
        let mut worst = 0.0f64;
        for (j, b) in basis.iter().enumerate() {
            let p = vec_col(&b.adjoint());
            let c = &coord_map * &p;
            worst = worst.max(max_abs(&(&basis_mat * &c - &p)));
            star.set_column(j, &c);
        }
        checks.record(
            "star-closure",
            "adjoints of basis elements lie in the span",
            worst,
            tol.threshold(scale),
            Kind::NotStarClosed,
        );
        checks.ensure()?;

        // Unit: Σ u_i b_i b_j = b_j = b_j Σ u_i b_i for every j.
        let mut m = CMat::zeros(2 * d * d, d);
        let mut rhs = CMat::zeros(2 * d * d, 1);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    m[(j * d + k, i)] = lreg[i][(k, j)];
                    m[(d * d + j * d + k, i)] = lreg[j][(k, i)];
                }
            }
        }
        for j in 0..d {
            rhs[(j * d + j, 0)] = Complex::one();
            rhs[(d * d + j * d + j, 0)] = Complex::one();
        }
        let (u, res) = linalg::lstsq(&m, &rhs, tol);
        checks.record(
            "unit",
            "a two-sided unit exists in the span",
            res,
            tol.threshold(1.0),
            Kind::NoUnit,
        );
        checks.ensure()?;
        let unit = CVec::from_column_slice(u.as_slice());
        Ok(FiniteCStarAlgebra { ambient: n, basis, basis_mat, coord_map, lreg, star, unit, tol, checks })
    }

    /// The full matrix algebra on `C^n` with matrix-unit basis `E_ij` at index `i*n + j`.
    pub fn full_matrix(n: usize, tol: Tolerance) -> Result<Self> {
        let mut basis = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut e = CMat::zeros(n, n);
                e[(i, j)] = Complex::one();
                basis.push(e);
            }
        }
        Self::validate(basis, tol)
    }

    /// Diagonal matrices, basis of minimal projections `E_ii`.
    pub fn diagonal(n: usize, tol: Tolerance) -> Result<Self> {
        let basis = (0..n)
            .map(|i| {
                let mut e = CMat::zeros(n, n);
                e[(i, i)] = Complex::one();
                e
            })
            .collect();
        Self::validate(basis, tol)
    }

    /// Scalar multiples of the identity of `M_n`.
    pub fn scalars(n: usize, tol: Tolerance) -> Result<Self> {
        Self::validate(vec![CMat::identity(n, n)], tol)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[CMat<T>] {
        &self.basis
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn checks(&self) -> &Checks {
        &self.checks
    }

    pub fn unit(&self) -> &CVec<T> {
        &self.unit
    }

    pub fn basis_vector(&self, i: usize) -> CVec<T> {
        linalg::basis_vector(self.dim(), i)
    }

    /// Star map on coordinates: `involute(x) = star · conj(x)`.
    pub fn star_matrix(&self) -> &CMat<T> {
        &self.star
    }

    /// Left multiplication by the `i`-th basis element, in coordinates.
    pub fn left_regular(&self, i: usize) -> &CMat<T> {
        &self.lreg[i]
    }

    /// Matrix of `y ↦ x·y`.
    pub fn left_mult(&self, x: &CVec<T>) -> CMat<T> {
        let mut m = CMat::zeros(self.dim(), self.dim());
        for (i, xi) in x.iter().enumerate() {
            if !xi.is_zero() {
                m += &self.lreg[i] * *xi;
            }
        }
        m
    }

    /// Matrix of `y ↦ y·x`.
    pub fn right_mult(&self, x: &CVec<T>) -> CMat<T> {
        let mut m = CMat::zeros(self.dim(), self.dim());
        for j in 0..self.dim() {
            m.set_column(j, &(&self.lreg[j] * x));
        }
        m
    }

    pub fn rep(&self, x: &CVec<T>) -> CMat<T> {
        let v = &self.basis_mat * x;
        CMat::from_column_slice(self.ambient, self.ambient, v.as_slice())
    }

    /// Coordinates of an ambient matrix together with the distance to the algebra.
    pub fn coords_residual(&self, m: &CMat<T>) -> (CVec<T>, f64) {
        let v = vec_col(m);
        let c = &self.coord_map * &v;
        let res = max_abs(&(&self.basis_mat * &c - v));
        (c, res)
    }

    /// Coordinates of `m`, or `None` if `m` is not in the algebra.
    pub fn coords(&self, m: &CMat<T>) -> Option<CVec<T>> {
        let (c, res) = self.coords_residual(m);
        (res <= self.tol.threshold(max_abs(m))).then_some(c)
    }

    pub fn multiply(&self, x: &CVec<T>, y: &CVec<T>) -> CVec<T> {
        assert_eq!(x.len(), self.dim(), "coefficient length");
        assert_eq!(y.len(), self.dim(), "coefficient length");
        self.left_mult(x) * y
    }

    pub fn involute(&self, x: &CVec<T>) -> CVec<T> {
        &self.star * x.conjugate()
    }

    /// The faithful trace `Tr(rep(x))` of the ambient representation.
    pub fn trace(&self, x: &CVec<T>) -> Complex<T> {
        self.rep(x).trace()
    }

    pub fn traces(&self) -> Vec<Complex<T>> {
        self.basis.iter().map(|b| b.trace()).collect()
    }

    /// C*-norm of an element (operator norm in the ambient representation).
    pub fn norm(&self, x: &CVec<T>) -> f64 {
        linalg::spectral_norm(&self.rep(x))
    }

    pub fn is_commutative(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| {
                max_abs(&(&self.lreg[i].column(j) - &self.lreg[j].column(i)))
                    <= self.tol.threshold(1.0)
            })
        })
    }

    /// Ranks of the basis elements when the basis consists of mutually orthogonal
    /// projections summing to the unit (a function algebra on points).
    pub fn is_point_basis(&self) -> bool {
        let mut sum = CMat::zeros(self.ambient, self.ambient);
        for (i, b) in self.basis.iter().enumerate() {
            if max_abs(&(b * b - b)) > self.tol.threshold(1.0)
                || max_abs(&(b.adjoint() - b)) > self.tol.threshold(1.0)
            {
                return false;
            }
            for c in &self.basis[i + 1..] {
                if max_abs(&(b * c)) > self.tol.threshold(1.0) {
                    return false;
                }
            }
            sum += b;
        }
        max_abs(&(sum - CMat::identity(self.ambient, self.ambient))) <= self.tol.threshold(1.0)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.ambient == other.ambient
    }

    /// Residual of `rep(x·y) = rep(x)·rep(y)`.
    pub fn product_residual(&self, x: &CVec<T>, y: &CVec<T>) -> f64 {
        max_abs(&(self.rep(&self.multiply(x, y)) - self.rep(x) * self.rep(y)))
    }
}

/// A nondegenerate unital inclusion `A ⊆ B` given by its coordinate embedding.
#[derive(Clone, Debug)]
pub struct Inclusion<T: Real> {
    pub sub: AlgebraRef<T>,
    pub amb: AlgebraRef<T>,
    pub embedding: CMat<T>,
    checks: Checks,
}

impl<T: Real> Inclusion<T> {
    pub fn check(
        sub: AlgebraRef<T>,
        amb: AlgebraRef<T>,
        embedding: CMat<T>,
        tol: Tolerance,
    ) -> Result<Self> {
        let (da, db) = (sub.dim(), amb.dim());
        if embedding.shape() != (db, da) {
            return Err(shape(format!(
                "embedding is {}x{}, expected {db}x{da}",
                embedding.nrows(),
                embedding.ncols()
            )));
        }
        let mut checks = Checks::new();
        let mut worst = 0.0f64;
        for i in 0..da {
            for j in 0..da {
                let (ai, aj) = (sub.basis_vector(i), sub.basis_vector(j));
                let lhs = &embedding * sub.multiply(&ai, &aj);
                let rhs = amb.multiply(&(&embedding * &ai), &(&embedding * &aj));
                worst = worst.max(max_abs(&(lhs - rhs)));
            }
        }
        checks.record(
            "embedding-multiplicative",
            "ι(a a') = ι(a) ι(a')",
            worst,
            tol.threshold(1.0),
            Kind::NotHomomorphism,
        );
        let star_res = max_abs(
            &(&embedding * sub.star_matrix() - amb.star_matrix() * embedding.conjugate()),
        );
        checks.record(
            "embedding-star",
            "ι(a*) = ι(a)*",
            star_res,
            tol.threshold(1.0),
            Kind::NotStarMap,
        );
        let r = rank(&embedding, tol);
        checks.record(
            "embedding-injective",
            "ι has trivial kernel",
            (da - r) as f64,
            0.0,
            Kind::NotInjective,
        );
        let mut prods = CMat::zeros(db, da * db);
        for i in 0..da {
            let ia = &embedding * sub.basis_vector(i);
            for j in 0..db {
                prods.set_column(i * db + j, &amb.multiply(&ia, &amb.basis_vector(j)));
            }
        }
        let span = rank(&prods, tol);
        let unit_res = max_abs(&(&embedding * sub.unit() - amb.unit()));
        checks.record(
            "nondegenerate",
            "span ι(A)·B = B",
            (db - span) as f64,
            0.0,
            Kind::Degenerate,
        );
        checks.record(
            "unital",
            "ι(1_A) = 1_B",
            unit_res,
            tol.threshold(1.0),
            Kind::Degenerate,
        );
        checks.ensure()?;
        Ok(Inclusion { sub, amb, embedding, checks })
    }

    pub fn checks(&self) -> &Checks {
        &self.checks
    }

    pub fn embed(&self, a: &CVec<T>) -> CVec<T> {
        &self.embedding * a
    }
}

pub(crate) fn one<T: Real>() -> Complex<T> {
    cx(1.0, 0.0)
}
