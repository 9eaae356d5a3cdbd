//! Scalar abstraction and the dense decompositions every other module leans on.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

/// Thin singular value decomposition `m = u · diag(s) · vᴴ`, singular values nonincreasing.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub u: CMat<T>,
    pub s: Vec<T>,
    pub v: CMat<T>,
}

/// Real scalar usable as the base field of all computations.
///
/// Decompositions are delegated to `faer`, which is an order of magnitude faster than
/// the generic nalgebra routines on complex matrices of the sizes met here.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Display + Debug + Send + Sync + 'static
{
    /// Default absolute and relative tolerance at this precision.
    const DEFAULT_TOL: f64;

    fn thin_svd(m: &CMat<Self>) -> Svd<Self>;

    /// Eigenvalues (nondecreasing) and eigenvectors of a Hermitian matrix.
    fn eigh(m: &CMat<Self>) -> (Vec<Self>, CMat<Self>);

    fn gemm(a: &CMat<Self>, b: &CMat<Self>) -> CMat<Self>;
}

fn to_faer<T: Copy>(m: &DMatrix<Complex<T>>) -> faer::MatRef<'_, Complex<T>> {
    faer::MatRef::from_column_major_slice(m.as_slice(), m.nrows(), m.ncols())
}

fn from_faer<T: RealField + Copy>(m: faer::MatRef<'_, Complex<T>>) -> CMat<T> {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

// Below this many scalar multiply-adds nalgebra's own product is fast enough.
const GEMM_CUTOFF: usize = 48 * 48 * 48;

macro_rules! impl_real {
    ($t:ty, $tol:expr) => {
        impl Real for $t {
            const DEFAULT_TOL: f64 = $tol;

            fn thin_svd(m: &CMat<Self>) -> Svd<Self> {
                let (r, c) = m.shape();
                if r == 0 || c == 0 {
                    return Svd {
                        u: CMat::zeros(r, 0),
                        s: Vec::new(),
                        v: CMat::zeros(c, 0),
                    };
                }
                let svd = to_faer(m).thin_svd().expect("svd did not converge");
                let s = svd.S().column_vector();
                Svd {
                    u: from_faer(svd.U()),
                    s: (0..s.nrows()).map(|i| s[i].re).collect(),
                    v: from_faer(svd.V()),
                }
            }

            fn eigh(m: &CMat<Self>) -> (Vec<Self>, CMat<Self>) {
                let n = m.nrows();
                if n == 0 {
                    return (Vec::new(), CMat::zeros(0, 0));
                }
                let e = to_faer(m)
                    .self_adjoint_eigen(faer::Side::Lower)
                    .expect("eigendecomposition did not converge");
                let s = e.S().column_vector();
                ((0..n).map(|i| s[i].re).collect(), from_faer(e.U()))
            }

            fn gemm(a: &CMat<Self>, b: &CMat<Self>) -> CMat<Self> {
                if a.nrows() * a.ncols() * b.ncols() < GEMM_CUTOFF {
                    return a * b;
                }
                let p = to_faer(a) * to_faer(b);
                from_faer(p.as_ref())
            }
        }
    };
}

impl_real!(f64, 1e-9);
impl_real!(f32, 1e-4);

pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("representable constant")
}

pub fn cx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(real(re), real(im))
}

pub fn f64_of<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
