//! Deterministic generators for worked examples: finite coverings, finite groups and
//! matrix inclusions, with enumerative oracle dimensions.

use crate::algebra::{one, AlgebraRef, FiniteCStarAlgebra, Inclusion};
use crate::coalgebra::Coalgebra;
use crate::comodule::Comodule;
use crate::connection::Omega;
use crate::error::{shape, Error, Kind, Result};
use crate::linalg::{self, max_abs, Tolerance};
use crate::module::{Correspondence, HilbertModule};
use crate::pair::AdjointPair;
use crate::report::Checks;
use crate::scalar::{cx, f64_of, CMat, CVec, Real};
use num_complex::Complex;
use rand::Rng;
use std::collections::HashMap;
use std::sync::Arc;

/// A surjection `N → M` of finite sets with a vector bundle on `N` given by its ranks.
#[derive(Clone, Debug, PartialEq)]
pub struct Covering {
    pub points_n: usize,
    pub points_m: usize,
    /// `fiber_map[n]` is the image of point `n`.
    pub fiber_map: Vec<usize>,
    pub bundle_dims: Vec<usize>,
}

impl Covering {
    pub fn new(points_m: usize, fiber_map: Vec<usize>, bundle_dims: Vec<usize>) -> Result<Self> {
        let points_n = fiber_map.len();
        if bundle_dims.len() != points_n {
            return Err(shape("one bundle rank per point of N"));
        }
        if fiber_map.iter().any(|&m| m >= points_m) {
            return Err(Error::new(Kind::InvalidArgument, "fiber map leaves M"));
        }
        if (0..points_m).any(|m| !fiber_map.contains(&m)) {
            return Err(Error::new(Kind::InvalidArgument, "fiber map is not surjective"));
        }
        Ok(Covering { points_n, points_m, fiber_map, bundle_dims })
    }

    pub fn fibers(&self) -> Vec<Vec<usize>> {
        (0..self.points_m)
            .map(|m| (0..self.points_n).filter(|&n| self.fiber_map[n] == m).collect())
            .collect()
    }

    /// Ranks over `M` when the bundle is constant along fibers.
    pub fn base_dims(&self) -> Option<Vec<usize>> {
        self.fibers()
            .iter()
            .map(|f| {
                let r = self.bundle_dims[f[0]];
                f.iter().all(|&n| self.bundle_dims[n] == r).then_some(r)
            })
            .collect()
    }

    /// `|N ×_M N|`.
    pub fn oracle_dim_c(&self) -> usize {
        self.fibers().iter().map(|f| f.len() * f.len()).sum()
    }

    pub fn oracle_dim_omega(&self) -> usize {
        self.oracle_dim_c() - self.points_n
    }

    /// `C(M) ⊆ C(N)` with point bases: fiber indicators inside the diagonal of `M_|N|`.
    pub fn inclusion<T: Real>(&self, tol: Tolerance) -> Result<Inclusion<T>> {
        let n = self.points_n;
        let amb = Arc::new(FiniteCStarAlgebra::diagonal(n, tol)?);
        let mut basis = Vec::with_capacity(self.points_m);
        let mut emb = CMat::zeros(n, self.points_m);
        for (m, fiber) in self.fibers().iter().enumerate() {
            let mut p = CMat::zeros(n, n);
            for &k in fiber {
                p[(k, k)] = one();
                emb[(k, m)] = one();
            }
            basis.push(p);
        }
        let sub = Arc::new(FiniteCStarAlgebra::validate(basis, tol)?);
        Inclusion::check(sub, amb, emb, tol)
    }
}

/// A bundle over a function algebra with a point basis, as a direct sum of the ideals
/// cut out by `{x : dims[x] ≥ r}`.
pub fn bundle<T: Real>(algebra: AlgebraRef<T>, dims: &[usize], tol: Tolerance) -> Result<HilbertModule<T>> {
    if !algebra.is_point_basis() || dims.len() != algebra.dim() {
        return Err(shape("bundles need a point basis and one rank per point"));
    }
    let top = dims.iter().copied().max().unwrap_or(0);
    let mut parts = Vec::new();
    for r in 1..=top {
        let mut p = CVec::zeros(algebra.dim());
        for (x, &d) in dims.iter().enumerate() {
            if d >= r {
                p[x] = one();
            }
        }
        parts.push(HilbertModule::from_projection(algebra.clone(), &p, tol)?);
    }
    if parts.is_empty() {
        return Err(Error::new(Kind::InvalidArgument, "the zero bundle has no summands"));
    }
    HilbertModule::direct_sum(&parts.iter().collect::<Vec<_>>())
}

/// Fiber ranks of a module over a function algebra with a point basis.
pub fn fiber_dims<T: Real>(module: &HilbertModule<T>) -> Vec<usize> {
    let a = module.algebra();
    (0..a.dim())
        .map(|k| linalg::rank(&module.action()[k], module.tolerance()))
        .collect()
}

/// A finite group by its multiplication table; element `identity` is the unit.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGroup {
    pub name: String,
    pub mult: Vec<Vec<usize>>,
    pub inverse: Vec<usize>,
    pub identity: usize,
}

impl FiniteGroup {
    /// Checks associativity, the identity and inverses exhaustively.
    pub fn from_table(name: impl Into<String>, mult: Vec<Vec<usize>>) -> Result<Self> {
        let n = mult.len();
        let bad = |d: &str| Error::new(Kind::InvalidArgument, d.to_string());
        if n == 0 || mult.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(bad("multiplication table must be square with entries in range"));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mult[e][g] == g && mult[g][e] == g))
            .ok_or_else(|| bad("no identity element"))?;
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let h = (0..n)
                .find(|&h| mult[g][h] == identity && mult[h][g] == identity)
                .ok_or_else(|| bad("an element has no inverse"))?;
            inverse.push(h);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(bad("multiplication is not associative"));
                    }
                }
            }
        }
        Ok(FiniteGroup { name: name.into(), mult, inverse, identity })
    }

    /// The closure of a set of permutations, composed as `(gh)(x) = g(h(x))`.
    pub fn generated_by(name: impl Into<String>, gens: &[Vec<usize>]) -> Result<Self> {
        let k = gens.first().map(|g| g.len()).unwrap_or(1);
        let id: Vec<usize> = (0..k).collect();
        let compose = |g: &[usize], h: &[usize]| h.iter().map(|&x| g[x]).collect::<Vec<_>>();
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut at = 0;
        while at < elems.len() {
            for g in gens {
                if g.len() != k {
                    return Err(Error::new(Kind::InvalidArgument, "generators act on different sets"));
                }
                let p = compose(g, &elems[at]);
                if !index.contains_key(&p) {
                    index.insert(p.clone(), elems.len());
                    elems.push(p);
                }
            }
            at += 1;
        }
        let mult = elems
            .iter()
            .map(|g| elems.iter().map(|h| index[&compose(g, h)]).collect())
            .collect();
        Self::from_table(name, mult)
    }

    pub fn cyclic(n: usize) -> Self {
        let shift: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
        Self::generated_by(format!("Z{n}"), &[shift]).expect("cyclic group")
    }

    pub fn klein() -> Self {
        Self::generated_by("Z2xZ2", &[vec![1, 0, 3, 2], vec![2, 3, 0, 1]]).expect("Klein group")
    }

    pub fn symmetric3() -> Self {
        Self::generated_by("S3", &[vec![1, 0, 2], vec![1, 2, 0]]).expect("S3")
    }

    /// Symmetries of a square acting on its vertices.
    pub fn dihedral4() -> Self {
        Self::generated_by("D4", &[vec![1, 2, 3, 0], vec![0, 3, 2, 1]]).expect("D4")
    }

    /// `±1, ±i, ±j, ±k` acting on themselves by left multiplication.
    pub fn quaternion() -> Self {
        // Unit `s·u` with u ∈ {1,i,j,k} is stored at 2u + (s < 0).
        let table = [[(1, 0), (1, 1), (1, 2), (1, 3)], [(1, 1), (-1, 0), (1, 3), (-1, 2)], [(1, 2), (-1, 3), (-1, 0), (1, 1)], [(1, 3), (1, 2), (-1, 1), (-1, 0)]];
        let mul = |a: usize, b: usize| {
            let (s, u) = table[a / 2][b / 2];
            let neg = (s < 0) ^ (a % 2 == 1) ^ (b % 2 == 1);
            2 * u + neg as usize
        };
        let left = |a: usize| (0..8).map(|b| mul(a, b)).collect::<Vec<_>>();
        Self::generated_by("Q8", &[left(2), left(4)]).expect("Q8")
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    /// `λ(g)δ_h = δ_{gh}`.
    pub fn left_regular<T: Real>(&self, g: usize) -> CMat<T> {
        let n = self.order();
        let mut m = CMat::zeros(n, n);
        for h in 0..n {
            m[(self.mult[g][h], h)] = one();
        }
        m
    }

    /// `ρ(g)δ_h = δ_{hg⁻¹}`.
    pub fn right_regular<T: Real>(&self, g: usize) -> CMat<T> {
        let n = self.order();
        let mut m = CMat::zeros(n, n);
        for h in 0..n {
            m[(self.mult[h][self.inverse[g]], h)] = one();
        }
        m
    }

    /// `C*(G)` as the span of the right-regular operators, basis `ρ(g)` in element order.
    pub fn algebra<T: Real>(&self, tol: Tolerance) -> Result<FiniteCStarAlgebra<T>> {
        FiniteCStarAlgebra::validate((0..self.order()).map(|g| self.right_regular(g)).collect(), tol)
    }

    /// `ℓ²(G)` over `C` with `C*(G)` acting on the left.
    pub fn correspondence<T: Real>(&self, tol: Tolerance) -> Result<Correspondence<T>> {
        let a = Arc::new(self.algebra(tol)?);
        let f = HilbertModule::column(self.order(), tol)?;
        let left = a.basis().to_vec();
        Correspondence::new(a, f, left, tol)
    }
}

/// The Fourier map `φ: C → C^G` and the transported coalgebra structure.
#[derive(Clone, Debug)]
pub struct Fourier<T: Real> {
    /// `φ` from quotient coordinates of `C` to functions on `G`.
    pub phi: CMat<T>,
    pub checks: Checks,
}

/// `φ(ξ* ⊗ ζ)(g) = ⟨ξ|λ(g)ζ⟩`, checked to be a bijection intertwining `δ` with
/// `(Δc)(g, h) = c(gh)` and `ε` with evaluation at the identity.
pub fn fourier<T: Real>(group: &FiniteGroup, co: &Coalgebra<T>) -> Result<Fourier<T>> {
    let n = group.order();
    let tol = co.tol;
    let c = co.c();
    if co.pair.m() != n || co.pair.b.dim() != 1 {
        return Err(shape("coalgebra does not come from ℓ²(G) over C"));
    }
    let mut phi_full = CMat::zeros(n, n * n);
    for g in 0..n {
        let lam = group.left_regular::<T>(g);
        for i in 0..n {
            for j in 0..n {
                phi_full[(g, i * n + j)] = lam[(i, j)];
            }
        }
    }
    let mut checks = Checks::new();
    checks.record(
        "fourier-well-defined",
        "matrix coefficients are balanced over C*(G)",
        crate::pair::relation_residual(&phi_full, c),
        tol.threshold(1.0),
        Kind::FourierIsoNotBijective,
    );
    let phi = &phi_full * &c.space.reps;
    let bij = phi.nrows() == phi.ncols() && linalg::rank(&phi, tol) == n;
    checks.record(
        "fourier-bijective",
        "φ is a linear bijection onto functions on G",
        if bij { 0.0 } else { 1.0 },
        0.0,
        Kind::FourierIsoNotBijective,
    );
    checks.ensure()?;

    let mut comult = CMat::zeros(n * n, n);
    for g in 0..n {
        for h in 0..n {
            comult[(g * n + h, group.mult[g][h])] = one();
        }
    }
    let lifted = co.cc.space.lift(&co.delta);
    let lhs = linalg::kron(&phi, &phi) * lifted;
    let rhs = &comult * &phi;
    checks.record(
        "fourier-coproduct",
        "(Δc)(g, h) = c(gh) over all pairs",
        max_abs(&(lhs - rhs)),
        tol.threshold(1.0),
        Kind::CoproductMismatch,
    );
    let ev = phi.row(group.identity).into_owned();
    checks.record(
        "fourier-counit",
        "ε(c) = c(e)",
        max_abs(&(co.eps() - ev)),
        tol.threshold(1.0),
        Kind::CounitMismatch,
    );
    checks.ensure()?;
    Ok(Fourier { phi, checks })
}

/// Inclusions of matrix algebras into `M_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixKind {
    Scalar(usize),
    Diagonal(usize),
    /// `⊕ M_k` with each block `(k, multiplicity)` repeated block-diagonally.
    Block { n: usize, blocks: Vec<(usize, usize)> },
}

impl MatrixKind {
    pub fn n(&self) -> usize {
        match self {
            MatrixKind::Scalar(n) | MatrixKind::Diagonal(n) => *n,
            MatrixKind::Block { n, .. } => *n,
        }
    }

    pub fn blocks(&self) -> Vec<(usize, usize)> {
        match self {
            MatrixKind::Scalar(n) => vec![(1, *n)],
            MatrixKind::Diagonal(n) => vec![(1, 1); *n],
            MatrixKind::Block { blocks, .. } => blocks.clone(),
        }
    }

    /// `dim B ⊗_A B = n² Σ multiplicity²`.
    pub fn oracle_dim_c(&self) -> usize {
        let n = self.n();
        n * n * self.blocks().iter().map(|(_, m)| m * m).sum::<usize>()
    }

    pub fn oracle_dim_omega(&self) -> usize {
        self.oracle_dim_c() - self.n() * self.n()
    }

    pub fn inclusion<T: Real>(&self, tol: Tolerance) -> Result<Inclusion<T>> {
        let n = self.n();
        let blocks = self.blocks();
        let used: usize = blocks.iter().map(|(k, m)| k * m).sum();
        if used != n || blocks.iter().any(|&(k, m)| k == 0 || m == 0) {
            return Err(Error::new(
                Kind::InconsistentMultiplicities,
                format!("blocks fill {used} of {n} dimensions"),
            ));
        }
        let amb = Arc::new(FiniteCStarAlgebra::full_matrix(n, tol)?);
        let mut basis = Vec::new();
        let mut offset = 0;
        for &(k, mult) in &blocks {
            for p in 0..k {
                for q in 0..k {
                    let mut e = CMat::zeros(n, n);
                    for r in 0..mult {
                        e[(offset + r * k + p, offset + r * k + q)] = one();
                    }
                    basis.push(e);
                }
            }
            offset += k * mult;
        }
        let mut emb = CMat::zeros(amb.dim(), basis.len());
        for (i, e) in basis.iter().enumerate() {
            let c = amb.coords(e).ok_or_else(|| shape("block unit outside M_n"))?;
            emb.set_column(i, &c);
        }
        let sub = Arc::new(FiniteCStarAlgebra::validate(basis, tol)?);
        Inclusion::check(sub, amb, emb, tol)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Covering(Covering),
    Group(FiniteGroup),
    Matrix(MatrixKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Oracle {
    pub dim_c: usize,
    pub dim_omega: Option<usize>,
}

/// A generated instance: the correspondence, the inclusion when there is one, and a
/// projection `p ∈ A` used for the test module `pA`.
#[derive(Clone, Debug)]
pub struct Instance<T: Real> {
    pub name: String,
    pub source: Source,
    pub inclusion: Option<Inclusion<T>>,
    pub correspondence: Correspondence<T>,
    pub projection: CVec<T>,
    pub oracle: Oracle,
    pub tol: Tolerance,
}

impl<T: Real> Instance<T> {
    pub fn build(name: impl Into<String>, source: Source, tol: Tolerance) -> Result<Self> {
        let (inclusion, correspondence, oracle) = match &source {
            Source::Covering(c) => {
                let inc = c.inclusion(tol)?;
                let f = Correspondence::from_inclusion(&inc, tol)?;
                let o = Oracle { dim_c: c.oracle_dim_c(), dim_omega: Some(c.oracle_dim_omega()) };
                (Some(inc), f, o)
            }
            Source::Matrix(k) => {
                let inc = k.inclusion(tol)?;
                let f = Correspondence::from_inclusion(&inc, tol)?;
                let o = Oracle { dim_c: k.oracle_dim_c(), dim_omega: Some(k.oracle_dim_omega()) };
                (Some(inc), f, o)
            }
            Source::Group(g) => {
                let f = g.correspondence(tol)?;
                (None, f, Oracle { dim_c: g.order(), dim_omega: None })
            }
        };
        let a = correspondence.left_algebra.clone();
        let projection = match &source {
            // The averaging projection of C*(G).
            Source::Group(g) => {
                CVec::from_element(g.order(), cx(1.0 / g.order() as f64, 0.0))
            }
            _ => a.basis_vector(0),
        };
        Ok(Instance { name: name.into(), source, inclusion, correspondence, projection, oracle, tol })
    }

    pub fn pair(&self) -> Result<AdjointPair<T>> {
        AdjointPair::from_correspondence(self.correspondence.clone(), self.tol)
    }

    pub fn coalgebra(&self) -> Result<Arc<Coalgebra<T>>> {
        Ok(Arc::new(Coalgebra::build(Arc::new(self.pair()?))?))
    }

    pub fn omega(&self, co: Arc<Coalgebra<T>>) -> Option<Result<Omega<T>>> {
        self.inclusion.as_ref().map(|inc| Omega::new(inc, co))
    }

    pub fn sub(&self) -> &AlgebraRef<T> {
        &self.correspondence.left_algebra
    }

    /// `A`, `A ⊕ A` and `pA`.
    pub fn standard_modules(&self) -> Result<Vec<(String, HilbertModule<T>)>> {
        let a = self.sub().clone();
        let x1 = HilbertModule::over_itself(a.clone(), self.tol)?;
        let x2 = HilbertModule::direct_sum(&[&x1, &x1])?;
        let xp = HilbertModule::from_projection(a, &self.projection, self.tol)?;
        Ok(vec![("A".into(), x1), ("A+A".into(), x2), ("pA".into(), xp)])
    }
}

/// The default gallery: three coverings, nine groups of order at most eight and four
/// matrix inclusions.
pub fn standard_sources() -> Vec<(String, Source)> {
    let cov = |m, f: &[usize], d: &[usize]| Source::Covering(Covering::new(m, f.to_vec(), d.to_vec()).expect("covering"));
    let mut out = vec![
        ("covering-3-2".to_string(), cov(2, &[0, 0, 1], &[1, 1, 2])),
        ("covering-identity-2".to_string(), cov(2, &[0, 1], &[1, 2])),
        ("covering-5-2".to_string(), cov(2, &[0, 0, 0, 1, 1], &[2, 2, 2, 1, 1])),
    ];
    for g in standard_groups() {
        out.push((format!("group-{}", g.name.to_lowercase()), Source::Group(g)));
    }
    out.push(("scalar-m2".into(), Source::Matrix(MatrixKind::Scalar(2))));
    out.push(("diagonal-m2".into(), Source::Matrix(MatrixKind::Diagonal(2))));
    out.push(("full-m2".into(), Source::Matrix(MatrixKind::Block { n: 2, blocks: vec![(2, 1)] })));
    out.push(("block-1+2-m3".into(), Source::Matrix(MatrixKind::Block { n: 3, blocks: vec![(1, 1), (2, 1)] })));
    out
}

pub fn standard_groups() -> Vec<FiniteGroup> {
    let mut gs: Vec<FiniteGroup> = (2..=8).filter(|n| *n != 6 && *n != 7).map(FiniteGroup::cyclic).collect();
    gs.push(FiniteGroup::klein());
    gs.push(FiniteGroup::symmetric3());
    gs.push(FiniteGroup::dihedral4());
    gs.push(FiniteGroup::quaternion());
    gs
}

pub fn standard_gallery<T: Real>(tol: Tolerance) -> Result<Vec<Instance<T>>> {
    standard_sources().into_iter().map(|(n, s)| Instance::build(n, s, tol)).collect()
}

fn random_complex<T: Real, R: Rng>(rng: &mut R) -> Complex<T> {
    cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_vector<T: Real, R: Rng>(n: usize, rng: &mut R) -> CVec<T> {
    CVec::from_fn(n, |_, _| random_complex(rng))
}

/// Orthonormal basis of the cyclic submodule `v·A` for a random `v`.
pub fn random_submodule<T: Real, R: Rng>(x: &HilbertModule<T>, rng: &mut R) -> CMat<T> {
    let v = random_vector(x.dim(), rng);
    let cols: Vec<CMat<T>> = x.action().iter().map(|a| linalg::cvec_to_mat(&(a * &v))).collect();
    let refs: Vec<&CMat<T>> = cols.iter().collect();
    linalg::image(&linalg::hstack(x.dim(), &refs), x.tolerance()).basis
}

/// A random unitary of `Z` commuting with the `B`-action: `W^{-1/2} exp(iH) W^{1/2}`
/// for a Hermitian `H` in the commutant, with `W` the trace-weighted Gram matrix.
pub fn random_b_unitary<T: Real, R: Rng>(z: &HilbertModule<T>, rng: &mut R) -> CMat<T> {
    b_linear_exponential(z, rng, |l| cx(l.cos(), l.sin()))
}

/// Like `random_b_unitary` with `exp(H)` in place of `exp(iH)`: `B`-linear and
/// invertible but not unitary.
pub fn random_b_positive<T: Real, R: Rng>(z: &HilbertModule<T>, rng: &mut R) -> CMat<T> {
    b_linear_exponential(z, rng, |l| cx(l.exp(), 0.0))
}

fn b_linear_exponential<T: Real, R: Rng>(
    z: &HilbertModule<T>,
    rng: &mut R,
    f: impl Fn(f64) -> Complex<T>,
) -> CMat<T> {
    let d = z.dim();
    let w = z.weight();
    let ws = linalg::hermitian_function(w, f64::sqrt);
    let wi = linalg::hermitian_function(w, |x| 1.0 / x.sqrt());
    // Commutant of the B-action in whitened coordinates, on row-major vec(T).
    let id = linalg::identity::<T>(d);
    let blocks: Vec<CMat<T>> = z
        .action()
        .iter()
        .map(|a| {
            let aw = &ws * a * &wi;
            linalg::kron(&id, &aw.transpose()) - linalg::kron(&aw, &id)
        })
        .collect();
    let refs: Vec<&CMat<T>> = blocks.iter().collect();
    let comm = linalg::kernel(&linalg::vstack(d * d, &refs), z.tolerance()).basis;
    let coeffs = random_vector::<T, R>(comm.ncols(), rng);
    let y = linalg::unvec((&comm * coeffs).as_slice(), d, d);
    let h = linalg::hermitian_part(&y);
    let (vals, vecs) = T::eigh(&h);
    let diag = CMat::from_diagonal(&CVec::from_iterator(d, vals.iter().map(|&l| f(f64_of(l)))));
    let u = &vecs * diag * vecs.adjoint();
    wi * u * ws
}

/// `(u ⊗ id)δ_Z u⁻¹` on the same module. Unitary `u` gives an isomorphic Hermitian
/// comodule; the axioms are assessed, not enforced.
pub fn twist<T: Real>(z: &Comodule<T>, u: &CMat<T>, co: &Coalgebra<T>) -> Result<Comodule<T>> {
    let uinv = u
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::new(Kind::Degenerate, "twist is not invertible"))?;
    let (push, _) = z.zc.space.push(u, &linalg::identity(co.dim()), &z.zc.space);
    Comodule::assess(z.module.clone(), push * &z.coaction * uinv, co, Some(z.zc.clone()))
}
