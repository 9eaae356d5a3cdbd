//! Tolerance-aware dense complex linear algebra: ranks, kernels, images, subspace
//! comparison, solves in a span, positivity, and the tensor-coordinate helpers.

use crate::error::{shape, Result};
use crate::scalar::{f64_of, real, CMat, CVec, Real};
use nalgebra::{ComplexField, Dim, Matrix, Storage};
use num_complex::Complex;
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Tolerance {
    pub fn new(absolute: f64, relative: f64) -> Self {
        assert!(absolute >= 0.0 && relative >= 0.0, "tolerances are nonnegative");
        Tolerance { absolute, relative }
    }

    pub fn uniform(t: f64) -> Self {
        Self::new(t, t)
    }

    pub fn default_for<T: Real>() -> Self {
        Self::uniform(T::DEFAULT_TOL)
    }

    /// Cut-off for a quantity whose natural magnitude is `scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.absolute.max(self.relative * scale)
    }
}

pub fn max_abs<T: Real, R: Dim, C: Dim, S: Storage<Complex<T>, R, C>>(
    m: &Matrix<Complex<T>, R, C, S>,
) -> f64 {
    m.iter().map(|z| f64_of(z.modulus())).fold(0.0, f64::max)
}

pub fn is_finite<T: Real>(m: &CMat<T>) -> bool {
    m.iter().all(|z| f64_of(z.re).is_finite() && f64_of(z.im).is_finite())
}

pub fn spectral_norm<T: Real>(m: &CMat<T>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    T::thin_svd(m).s.first().map(|s| f64_of(*s)).unwrap_or(0.0)
}

pub fn identity<T: Real>(n: usize) -> CMat<T> {
    CMat::identity(n, n)
}

pub fn scale<T: Real>(m: &CMat<T>, s: f64) -> CMat<T> {
    m * Complex::new(real::<T>(s), T::zero())
}

/// Span of orthonormal coordinate vectors, recorded with the tolerance that built it.
#[derive(Clone, Debug)]
pub struct Subspace<T: Real> {
    pub ambient: usize,
    pub basis: CMat<T>,
    pub tol: Tolerance,
}

impl<T: Real> Subspace<T> {
    pub fn zero(ambient: usize, tol: Tolerance) -> Self {
        Subspace { ambient, basis: CMat::zeros(ambient, 0), tol }
    }

    pub fn full(ambient: usize, tol: Tolerance) -> Self {
        Subspace { ambient, basis: identity(ambient), tol }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> CMat<T> {
        &self.basis * self.basis.adjoint()
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &CVec<T>) -> f64 {
        let p = &self.basis * (self.basis.adjoint() * v);
        f64_of((v - p).norm())
    }

    pub fn contains(&self, v: &CVec<T>) -> bool {
        self.distance(v) <= self.tol.threshold(f64_of(v.norm()))
    }
}

fn rank_from(s: &[f64], tol: Tolerance) -> usize {
    let top = s.first().copied().unwrap_or(0.0);
    let thr = tol.threshold(top);
    s.iter().filter(|&&x| x > thr).count()
}

fn singular_values<T: Real>(s: &[T]) -> Vec<f64> {
    s.iter().map(|x| f64_of(*x)).collect()
}

pub fn rank<T: Real>(m: &CMat<T>, tol: Tolerance) -> usize {
    if m.is_empty() {
        return 0;
    }
    rank_from(&singular_values(&T::thin_svd(m).s), tol)
}

/// Span of the right-singular directions whose singular value is at most the threshold.
pub fn kernel<T: Real>(m: &CMat<T>, tol: Tolerance) -> Subspace<T> {
    let (r, c) = m.shape();
    if c == 0 {
        return Subspace::zero(0, tol);
    }
    if r == 0 {
        return Subspace::full(c, tol);
    }
    // Pad short matrices so the decomposition yields a complete set of right vectors.
    let padded;
    let work = if r < c {
        padded = {
            let mut p = CMat::zeros(c, c);
            p.view_mut((0, 0), (r, c)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let svd = T::thin_svd(work);
    let s = singular_values(&svd.s);
    let k = rank_from(&s, tol);
    Subspace { ambient: c, basis: svd.v.columns(k, c - k).into_owned(), tol }
}

/// Column space of `m`.
pub fn image<T: Real>(m: &CMat<T>, tol: Tolerance) -> Subspace<T> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Subspace::zero(r, tol);
    }
    let svd = T::thin_svd(m);
    let k = rank_from(&singular_values(&svd.s), tol);
    Subspace { ambient: r, basis: svd.u.columns(0, k).into_owned(), tol }
}

/// Operator-norm distance between the orthogonal projections onto `a` and `b`.
pub fn subspace_distance<T: Real>(a: &Subspace<T>, b: &Subspace<T>) -> Result<f64> {
    if a.ambient != b.ambient {
        return Err(shape(format!(
            "subspaces live in dimensions {} and {}",
            a.ambient, b.ambient
        )));
    }
    if a.dim() != b.dim() {
        return Ok(1.0);
    }
    if a.dim() == 0 {
        return Ok(0.0);
    }
    // For equal dimensions this is the sine of the largest principal angle.
    let r = &a.basis - &b.basis * (b.basis.adjoint() * &a.basis);
    Ok(spectral_norm(&r))
}

pub fn subspace_equal<T: Real>(a: &Subspace<T>, b: &Subspace<T>, tol: Tolerance) -> Result<bool> {
    Ok(subspace_distance(a, b)? <= tol.threshold(1.0))
}

/// Moore–Penrose pseudo-inverse with singular values below the threshold dropped.
pub fn pinv<T: Real>(m: &CMat<T>, tol: Tolerance) -> CMat<T> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return CMat::zeros(c, r);
    }
    let svd = T::thin_svd(m);
    let k = rank_from(&singular_values(&svd.s), tol);
    let mut vs = svd.v.columns(0, k).into_owned();
    for j in 0..k {
        let inv = T::one() / svd.s[j];
        vs.column_mut(j).scale_mut(inv);
    }
    T::gemm(&vs, &svd.u.columns(0, k).adjoint())
}

/// Least-squares solution of `a x = b` together with the residual `max|a x - b|`.
pub fn lstsq<T: Real>(a: &CMat<T>, b: &CMat<T>, tol: Tolerance) -> (CMat<T>, f64) {
    let x = T::gemm(&pinv(a, tol), b);
    let res = max_abs(&(T::gemm(a, &x) - b));
    (x, res)
}

/// Coefficients expressing `target` in the span of `vectors`, or `None` when the
/// least-squares residual exceeds the tolerance ("not in span").
pub fn solve_in_span<T: Real>(
    vectors: &[CMat<T>],
    target: &CMat<T>,
    tol: Tolerance,
) -> Result<Option<CVec<T>>> {
    let n = target.len();
    if vectors.iter().any(|v| v.shape() != target.shape()) {
        return Err(shape("span vectors and target differ in shape"));
    }
    let mut a = CMat::zeros(n, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        a.column_mut(j).copy_from_slice(v.as_slice());
    }
    let b = CMat::from_column_slice(n, 1, target.as_slice());
    let (x, res) = lstsq(&a, &b, tol);
    let scale = max_abs(target).max(spectral_norm(&a));
    if res <= tol.threshold(scale) {
        Ok(Some(CVec::from_column_slice(x.as_slice())))
    } else {
        Ok(None)
    }
}

pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    let half = Complex::new(real::<T>(0.5), T::zero());
    (m + m.adjoint()) * half
}

/// Hermitian within tolerance with smallest eigenvalue at least `-threshold`.
pub fn is_psd<T: Real>(m: &CMat<T>, tol: Tolerance) -> Result<bool> {
    if !m.is_square() {
        return Err(shape(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    if m.is_empty() {
        return Ok(true);
    }
    let scale = max_abs(m);
    if max_abs(&(m - m.adjoint())) > tol.threshold(scale) {
        return Ok(false);
    }
    Ok(min_eigenvalue(m) >= -tol.threshold(scale))
}

pub fn min_eigenvalue<T: Real>(m: &CMat<T>) -> f64 {
    let (w, _) = T::eigh(&hermitian_part(m));
    w.first().map(|x| f64_of(*x)).unwrap_or(0.0)
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function<T: Real>(m: &CMat<T>, f: impl Fn(f64) -> f64) -> CMat<T> {
    let (w, v) = T::eigh(&hermitian_part(m));
    let mut vd = v.clone();
    for (j, x) in w.iter().enumerate() {
        let fx = real::<T>(f(f64_of(*x)));
        vd.column_mut(j).scale_mut(fx);
    }
    T::gemm(&vd, &v.adjoint())
}

pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Row-major reshape of a coordinate vector into an `r x c` matrix: entry `(i, j)` is
/// coordinate `i * c + j`, the convention used for every tensor space.
pub fn unvec<T: Real>(v: &[Complex<T>], r: usize, c: usize) -> CMat<T> {
    CMat::from_row_slice(r, c, v)
}

pub fn vec_rows<T: Real>(m: &CMat<T>) -> CVec<T> {
    CVec::from_column_slice(m.transpose().as_slice())
}

/// `(a ⊗ b) x` without forming the Kronecker product.
pub fn kron_apply<T: Real>(a: &CMat<T>, b: &CMat<T>, x: &CMat<T>) -> CMat<T> {
    let (q, s) = (a.ncols(), b.ncols());
    assert_eq!(x.nrows(), q * s, "kron_apply shape");
    let (p, r) = (a.nrows(), b.nrows());
    let mut out = CMat::zeros(p * r, x.ncols());
    let n = x.nrows();
    let bt = b.transpose();
    for j in 0..x.ncols() {
        let xm = unvec(&x.as_slice()[j * n..(j + 1) * n], q, s);
        let y = T::gemm(&T::gemm(a, &xm), &bt);
        out.column_mut(j).copy_from(&vec_rows(&y));
    }
    out
}

/// Orthonormal bases of the complement of, and of, the span of the relation operators
/// `ρ_k ⊗ I - I ⊗ λ_k` acting on `C^nx ⊗ C^ny`.
///
/// The span is read off the eigenvalues of `Σ T_k T_kᴴ`; eigenvalues carry the squared
/// singular values, so the cut is effectively the square root of the tolerance on the
/// singular values.
pub fn relation_complement<T: Real>(
    pairs: &[(CMat<T>, CMat<T>)],
    nx: usize,
    ny: usize,
    tol: Tolerance,
) -> (CMat<T>, CMat<T>) {
    let n = nx * ny;
    let mut g = CMat::<T>::zeros(n, n);
    let ix = identity::<T>(nx);
    let iy = identity::<T>(ny);
    for (rho, lam) in pairs {
        let d = kron(rho, &iy) - kron(&ix, lam);
        if max_abs(&d) == 0.0 {
            continue;
        }
        g += kron(&T::gemm(rho, &rho.adjoint()), &iy);
        g -= kron(rho, &lam.adjoint());
        g -= kron(&rho.adjoint(), lam);
        g += kron(&ix, &T::gemm(lam, &lam.adjoint()));
    }
    let top = max_abs(&g);
    if top <= tol.absolute {
        return (identity(n), CMat::zeros(n, 0));
    }
    let (w, v) = T::eigh(&hermitian_part(&g));
    let lmax = w.last().map(|x| f64_of(*x)).unwrap_or(0.0);
    let thr = tol.threshold(lmax);
    let k = w.iter().filter(|x| f64_of(**x) <= thr).count();
    (v.columns(0, k).into_owned(), v.columns(k, n - k).into_owned())
}

pub fn column<T: Real>(m: &CMat<T>, j: usize) -> CVec<T> {
    m.column(j).into_owned()
}

pub fn basis_vector<T: Real>(n: usize, i: usize) -> CVec<T> {
    let mut v = CVec::zeros(n);
    v[i] = Complex::new(T::one(), T::zero());
    v
}

pub fn hstack<T: Real>(rows: usize, blocks: &[&CMat<T>]) -> CMat<T> {
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

pub fn vstack<T: Real>(cols: usize, blocks: &[&CMat<T>]) -> CMat<T> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

pub fn cvec_to_mat<T: Real>(v: &CVec<T>) -> CMat<T> {
    CMat::from_column_slice(v.len(), 1, v.as_slice())
}

pub fn is_zero_matrix<T: Real>(m: &CMat<T>) -> bool {
    m.iter().all(|z| z.is_zero())
}
