//! Balanced tensor products realized as quotients of the coordinate tensor space.

use crate::error::{shape, Error, Kind, Result};
use crate::linalg::{self, kron_apply, max_abs, Subspace, Tolerance};
use crate::module::{Action, Bimodule, Correspondence, HilbertModule};
use crate::report::Checks;
use crate::scalar::{CMat, Real};

/// `X ⊗_A Y` as the quotient of `C^{dim X} ⊗ C^{dim Y}` by the balancing relations.
///
/// Full coordinates index `x_i ⊗ y_j` at `i * right_dim + j`. Quotient coordinates are
/// taken against a basis of representatives `reps`; `proj` maps full coordinates to
/// quotient coordinates and annihilates the relations.
#[derive(Clone, Debug)]
pub struct QuotientTensor<T: Real> {
    pub left_dim: usize,
    pub right_dim: usize,
    pub reps: CMat<T>,
    pub proj: CMat<T>,
    pub relations: CMat<T>,
    pub tol: Tolerance,
    /// No relations and standard coordinates: `reps` and `proj` are identities.
    pub trivial: bool,
}

impl<T: Real> QuotientTensor<T> {
    pub fn dim(&self) -> usize {
        self.reps.ncols()
    }

    pub fn full_dim(&self) -> usize {
        self.left_dim * self.right_dim
    }

    pub fn relation_subspace(&self) -> Subspace<T> {
        Subspace { ambient: self.full_dim(), basis: self.relations.clone(), tol: self.tol }
    }

    pub fn lift(&self, v: &CMat<T>) -> CMat<T> {
        if self.trivial {
            return v.clone();
        }
        T::gemm(&self.reps, v)
    }

    pub fn project(&self, w: &CMat<T>) -> CMat<T> {
        if self.trivial {
            return w.clone();
        }
        T::gemm(&self.proj, w)
    }

    /// Quotient coordinates of `x ⊗ y` for full-coordinate columns of `x` and `y`.
    pub fn elementary(&self, x: &CMat<T>, y: &CMat<T>) -> CMat<T> {
        self.project(&linalg::kron(x, y))
    }

    /// Matrix of `f ⊗ g` from this quotient to `target`, with the residual of its
    /// well-definedness (how far it is from mapping relations to relations).
    pub fn push(&self, f: &CMat<T>, g: &CMat<T>, target: &QuotientTensor<T>) -> (CMat<T>, f64) {
        let m = target.project(&kron_apply(f, g, &self.reps));
        let res = if self.relations.ncols() == 0 {
            0.0
        } else {
            max_abs(&target.project(&kron_apply(f, g, &self.relations)))
        };
        (m, res)
    }

    /// Re-express coordinates against new representatives (columns of `reps`), whose
    /// classes must form a basis of the quotient.
    pub fn rebase(&self, reps: CMat<T>) -> Result<Self> {
        if reps.shape() != (self.full_dim(), self.dim()) {
            return Err(shape("new representatives have the wrong shape"));
        }
        let change = self.project(&reps);
        if linalg::rank(&change, self.tol) < self.dim() {
            return Err(Error::new(Kind::Degenerate, "representatives do not span the quotient"));
        }
        let inv = change
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::new(Kind::Degenerate, "singular change of basis"))?;
        Ok(QuotientTensor {
            left_dim: self.left_dim,
            right_dim: self.right_dim,
            proj: T::gemm(&inv, &self.proj),
            reps,
            relations: self.relations.clone(),
            tol: self.tol,
            trivial: false,
        })
    }
}

/// A balanced tensor product with its induced outer actions.
#[derive(Clone, Debug)]
pub struct Tensor<T: Real> {
    pub space: QuotientTensor<T>,
    pub bimodule: Bimodule<T>,
}

impl<T: Real> Tensor<T> {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Same tensor with different quotient coordinates; actions are recomputed.
    pub fn rebase(&self, reps: CMat<T>, x: &Bimodule<T>, y: &Bimodule<T>) -> Result<Self> {
        let space = self.space.rebase(reps)?;
        let bimodule = induced(&space, x, y);
        Ok(Tensor { space, bimodule })
    }
}

fn induced<T: Real>(space: &QuotientTensor<T>, x: &Bimodule<T>, y: &Bimodule<T>) -> Bimodule<T> {
    let left = x.left.as_ref().map(|a| Action {
        algebra: a.algebra.clone(),
        mats: a
            .mats
            .iter()
            .map(|l| induced_one(space, l, &linalg::identity(y.dim)))
            .collect(),
    });
    let right = y.right.as_ref().map(|a| Action {
        algebra: a.algebra.clone(),
        mats: a
            .mats
            .iter()
            .map(|r| induced_one(space, &linalg::identity(x.dim), r))
            .collect(),
    });
    Bimodule { dim: space.dim(), left, right }
}

fn induced_one<T: Real>(space: &QuotientTensor<T>, f: &CMat<T>, g: &CMat<T>) -> CMat<T> {
    if space.trivial {
        return linalg::kron(f, g);
    }
    space.project(&kron_apply(f, g, &space.reps))
}

/// `X ⊗_A Y` for a right `A`-structure on `X` and a left `A`-structure on `Y`.
pub fn balanced_tensor<T: Real>(x: &Bimodule<T>, y: &Bimodule<T>, tol: Tolerance) -> Result<Tensor<T>> {
    let rx = x.right.as_ref().ok_or_else(|| shape("left factor has no right action"))?;
    let ly = y.left.as_ref().ok_or_else(|| shape("right factor has no left action"))?;
    if !rx.algebra.same_shape(&ly.algebra) || rx.mats.len() != ly.mats.len() {
        return Err(shape("factors are balanced over different algebras"));
    }
    if rx.mats.iter().any(|m| m.shape() != (x.dim, x.dim))
        || ly.mats.iter().any(|m| m.shape() != (y.dim, y.dim))
    {
        return Err(shape("action matrices do not match the factor dimensions"));
    }
    let pairs: Vec<_> = rx.mats.iter().cloned().zip(ly.mats.iter().cloned()).collect();
    let (q, r) = linalg::relation_complement(&pairs, x.dim, y.dim, tol);
    let trivial = r.ncols() == 0 && q == linalg::identity::<T>(q.nrows());
    let space = QuotientTensor {
        left_dim: x.dim,
        right_dim: y.dim,
        proj: q.adjoint(),
        reps: q,
        relations: r,
        tol,
        trivial,
    };
    let bimodule = induced(&space, x, y);
    Ok(Tensor { space, bimodule })
}

/// Interior tensor product `X ⊗_A F` of a Hilbert `A`-module with a correspondence,
/// carrying `⟨x₁⊗f₁|x₂⊗f₂⟩ = ⟨f₁|⟨x₁|x₂⟩·f₂⟩`.
#[derive(Clone, Debug)]
pub struct Interior<T: Real> {
    pub module: HilbertModule<T>,
    pub tensor: Tensor<T>,
    pub checks: Checks,
}

pub fn interior_tensor<T: Real>(
    x: &HilbertModule<T>,
    f: &Correspondence<T>,
    tol: Tolerance,
) -> Result<Interior<T>> {
    let tensor = balanced_tensor(&x.as_bimodule(), &f.bimodule(), tol)?;
    let (n, m) = (x.dim(), f.module.dim());
    let full = interior_full_gram(x, f);
    let space = &tensor.space;
    let mut checks = Checks::new();
    let scale = full.iter().map(max_abs).fold(1.0, f64::max);
    let ill = if space.relations.ncols() == 0 {
        0.0
    } else {
        full.iter().map(|g| max_abs(&T::gemm(g, &space.relations))).fold(0.0, f64::max)
    };
    checks.record(
        "inner-product-well-defined",
        "the semi-inner product vanishes on balancing relations",
        ill,
        tol.threshold(scale),
        Kind::InnerProductIllDefined,
    );
    checks.ensure()?;
    // The quotient dimension must equal the rank of the scalar Gram form.
    let traces = f.module.algebra().traces();
    let mut w = CMat::zeros(n * m, n * m);
    for (g, t) in full.iter().zip(traces.iter()) {
        w += g * *t;
    }
    let gram_rank = linalg::rank(&linalg::hermitian_part(&w), tol);
    checks.record(
        "quotient-dim-equals-gram-rank",
        "dim X⊗_A F equals the rank of the semi-inner product",
        (gram_rank as f64 - space.dim() as f64).abs(),
        0.0,
        Kind::InnerProductIllDefined,
    );
    checks.ensure()?;
    let gram = full
        .iter()
        .map(|g| T::gemm(&space.reps.adjoint(), &T::gemm(g, &space.reps)))
        .collect();
    let action = tensor.bimodule.right.as_ref().map(|a| a.mats.clone()).unwrap_or_default();
    let module = HilbertModule::validate(f.module.algebra().clone(), action, gram, tol)?;
    Ok(Interior { module, tensor, checks })
}

/// Semi-inner product of `X ⊗ F` in full coordinates, one matrix per `B` coordinate.
fn interior_full_gram<T: Real>(x: &HilbertModule<T>, f: &Correspondence<T>) -> Vec<CMat<T>> {
    let (n, m) = (x.dim(), f.module.dim());
    let fgram = f.module.gram();
    let mut out = vec![CMat::zeros(n * m, n * m); fgram.len()];
    for i in 0..n {
        for k in 0..n {
            let lam = f.left(&x.gram_entry(i, k));
            for (t, g) in fgram.iter().enumerate() {
                let block = g * &lam;
                out[t].view_mut((i * m, k * m), (m, m)).copy_from(&block);
            }
        }
    }
    out
}

/// Whether `image(i ⊗ id_Y) = ker(q ⊗ id_Y)` inside `X ⊗_A Y` for the submodule spanned
/// by the orthonormal columns of `sub`. Returns the verdict and the subspace distance.
pub fn exactness_check<T: Real>(
    x: &Bimodule<T>,
    sub: &CMat<T>,
    y: &Bimodule<T>,
    tol: Tolerance,
) -> Result<(bool, f64)> {
    let rx = x.right.as_ref().ok_or_else(|| shape("X has no right action"))?;
    let p = T::gemm(sub, &sub.adjoint());
    for r in &rx.mats {
        let rs = T::gemm(r, sub);
        if max_abs(&(&rs - T::gemm(&p, &rs))) > tol.threshold(max_abs(r).max(1.0)) {
            return Err(Error::new(Kind::NotASubmodule, "subspace not invariant under A"));
        }
    }
    let xy = balanced_tensor(x, y, tol)?;
    let iy = linalg::identity::<T>(y.dim);
    let img = xy.space.project(&linalg::kron(sub, &iy));
    let image = linalg::image(&img, tol);

    let comp = linalg::kernel(&sub.adjoint(), tol).basis;
    let quot = Bimodule {
        dim: comp.ncols(),
        left: None,
        right: Some(Action {
            algebra: rx.algebra.clone(),
            mats: rx.mats.iter().map(|r| comp.adjoint() * r * &comp).collect(),
        }),
    };
    let qy = balanced_tensor(&quot, y, tol)?;
    let (qmap, _) = xy.space.push(&comp.adjoint(), &iy, &qy.space);
    let ker = linalg::kernel(&qmap, tol);
    let dist = linalg::subspace_distance(&image, &ker)?;
    Ok((dist <= tol.threshold(1.0), dist))
}
