mod common;

use common::*;
use cstar_descent::comodule::{comparison, roundtrip_comodule};
use cstar_descent::gallery::{self, Covering, FiniteGroup, Instance, MatrixKind, Source};
use cstar_descent::linalg;
use cstar_descent::{Kind, Matrix};

fn build(source: Source) -> Instance<f64> {
    Instance::build("t", source, tol()).unwrap()
}

/// `|N ×_M N|` by listing pairs.
fn fibered_pairs(c: &Covering) -> usize {
    let n = c.fiber_map.len();
    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| c.fiber_map[a] == c.fiber_map[b]).count()
}

#[test]
fn covering_three_over_two() {
    let cov = Covering::new(2, vec![0, 0, 1], vec![1, 1, 2]).unwrap();
    assert_eq!(fibered_pairs(&cov), 5);
    let inst = build(Source::Covering(cov.clone()));
    let co = inst.coalgebra().unwrap();
    assert_eq!(co.dim(), 5);
    assert_eq!(inst.omega(co.clone()).unwrap().unwrap().dim(), 5 - 3);
    // The bundle is constant along fibers, so it descends to ranks (1, 2) over M.
    assert_eq!(cov.base_dims(), Some(vec![1, 2]));
    let x = gallery::bundle(inst.sub().clone(), &[1, 2], tol()).unwrap();
    let z = comparison(&x, &co).unwrap().comodule;
    assert_eq!(gallery::fiber_dims(&z.module), vec![1, 1, 2]);
    assert!(z.checks.all_pass());
    let d = roundtrip_comodule(&z, &co).unwrap();
    assert_eq!(gallery::fiber_dims(&d.cotensor.module), vec![1, 2]);
}

#[test]
fn identity_covering() {
    let cov = Covering::new(2, vec![0, 1], vec![1, 2]).unwrap();
    let inst = build(Source::Covering(cov));
    let co = inst.coalgebra().unwrap();
    assert_eq!(co.dim(), 2);
    assert_eq!(inst.omega(co).unwrap().unwrap().dim(), 0);
}

#[test]
fn covering_oracles_match_listing() {
    for (m, map) in [(2, vec![0, 0, 1]), (2, vec![0, 1, 0, 1, 0]), (1, vec![0, 0, 0]), (3, vec![2, 1, 0])] {
        let n = map.len();
        let cov = Covering::new(m, map, vec![1; n]).unwrap();
        assert_eq!(cov.oracle_dim_c(), fibered_pairs(&cov));
        let co = build(Source::Covering(cov.clone())).coalgebra().unwrap();
        assert_eq!(co.dim(), fibered_pairs(&cov));
    }
}

#[test]
fn bundle_not_constant_on_fibers_has_no_base() {
    let cov = Covering::new(2, vec![0, 0, 1], vec![1, 2, 2]).unwrap();
    assert_eq!(cov.base_dims(), None);
}

#[test]
fn malformed_coverings() {
    assert_eq!(Covering::new(2, vec![0, 0, 0], vec![1, 1, 1]).unwrap_err().kind, Kind::InvalidArgument);
    assert_eq!(Covering::new(2, vec![0, 3], vec![1, 1]).unwrap_err().kind, Kind::InvalidArgument);
    assert_eq!(Covering::new(2, vec![0, 1], vec![1]).unwrap_err().kind, Kind::ShapeMismatch);
}

/// Transports `δ` and `ε` through `φ` built here from the multiplication table, and
/// returns the worst deviation from `c(gh)` and from evaluation at the identity.
fn fourier_oracle(g: &FiniteGroup) -> (f64, f64) {
    let n = g.order();
    let inst = build(Source::Group(g.clone()));
    let co = inst.coalgebra().unwrap();
    assert_eq!(co.dim(), n);
    // φ(δ_a* ⊗ δ_b)(x) = ⟨δ_a|λ(x)δ_b⟩ = [x·b = a]
    let mut phi_full = Matrix::zeros(n, n * n);
    for x in 0..n {
        for b in 0..n {
            phi_full[(x, g.mult[x][b] * n + b)] = c(1.0);
        }
    }
    let phi = &phi_full * &co.c().space.reps;
    assert_eq!(gs_rank_of(&phi, 1e-9), n);
    let lifted = co.cc.space.lift(&co.delta);
    let mut coproduct = 0.0f64;
    for k in 0..n {
        let f = phi.column(k);
        let pairs = kron(&phi, &phi) * lifted.column(k);
        for x in 0..n {
            for y in 0..n {
                coproduct = coproduct.max((pairs[x * n + y] - f[g.mult[x][y]]).norm());
            }
        }
    }
    let counit = (0..n).map(|k| (co.eps()[(0, k)] - phi[(g.identity, k)]).norm()).fold(0.0, f64::max);
    (coproduct, counit)
}

#[test]
fn fourier_z2_delta_of_the_identity_indicator() {
    let g = FiniteGroup::cyclic(2);
    let inst = build(Source::Group(g.clone()));
    let co = inst.coalgebra().unwrap();
    let f = gallery::fourier(&g, &co).unwrap();
    // c = φ⁻¹(δ_e); (Δc)(x, y) = [xy = e] at all four points.
    let mut target = cstar_descent::Vector::zeros(2);
    target[g.identity] = c(1.0);
    let cvec: Matrix = f.phi.clone().try_inverse().unwrap() * Matrix::from_column_slice(2, 1, target.as_slice());
    let vals = kron(&f.phi, &f.phi) * co.cc.space.lift(&(&co.delta * cvec));
    for x in 0..2 {
        for y in 0..2 {
            let expected = if g.mult[x][y] == g.identity { 1.0 } else { 0.0 };
            assert!((vals[(x * 2 + y, 0)] - c(expected)).norm() < TOL);
        }
    }
}

#[test]
fn fourier_trivial_group() {
    let g = FiniteGroup::cyclic(1);
    let inst = build(Source::Group(g.clone()));
    let co = inst.coalgebra().unwrap();
    assert_eq!(co.dim(), 1);
    assert_eq!(co.pair.k.dim(), 1);
    let f = gallery::fourier(&g, &co).unwrap();
    assert!((f.phi[(0, 0)].norm() - 1.0).abs() < TOL);
}

#[test]
fn fourier_on_every_standard_group() {
    for g in gallery::standard_groups() {
        let (coproduct, counit) = fourier_oracle(&g);
        assert!(coproduct <= TOL, "{}: coproduct {coproduct}", g.name);
        assert!(counit <= TOL, "{}: counit {counit}", g.name);
        let inst = build(Source::Group(g.clone()));
        let f = gallery::fourier(&g, &inst.coalgebra().unwrap()).unwrap();
        assert!(f.checks.all_pass());
    }
}

#[test]
fn s3_has_six_dimensional_coalgebra() {
    let g = FiniteGroup::symmetric3();
    assert_eq!(g.order(), 6);
    // Non-abelian: some pair does not commute.
    assert!((0..6).any(|a| (0..6).any(|b| g.mult[a][b] != g.mult[b][a])));
    let (coproduct, _) = fourier_oracle(&g);
    assert!(coproduct <= TOL);
}

#[test]
fn group_orders_and_tables() {
    let orders: Vec<(String, usize)> = gallery::standard_groups().iter().map(|g| (g.name.clone(), g.order())).collect();
    for (name, n) in [("Z2", 2), ("Z3", 3), ("Z4", 4), ("Z5", 5), ("Z8", 8), ("Z2xZ2", 4), ("S3", 6), ("D4", 8), ("Q8", 8)] {
        assert!(orders.contains(&(name.to_string(), n)), "{name}");
    }
    // Q8 has a single element of order two, D4 has five.
    let involutions = |g: &FiniteGroup| (0..g.order()).filter(|&x| x != g.identity && g.mult[x][x] == g.identity).count();
    assert_eq!(involutions(&FiniteGroup::quaternion()), 1);
    assert_eq!(involutions(&FiniteGroup::dihedral4()), 5);
}

#[test]
fn regular_representations_commute() {
    let g = FiniteGroup::dihedral4();
    for a in 0..g.order() {
        for b in 0..g.order() {
            let l: Matrix = g.left_regular(a);
            let r: Matrix = g.right_regular(b);
            assert!(max_abs(&(&l * &r - &r * &l)) == 0.0);
        }
    }
}

#[test]
fn bad_group_tables() {
    let e = FiniteGroup::from_table("x", vec![vec![0, 1], vec![1, 1]]).unwrap_err();
    assert_eq!(e.kind, Kind::InvalidArgument);
    let e = FiniteGroup::from_table("x", vec![vec![0, 1], vec![1]]).unwrap_err();
    assert_eq!(e.kind, Kind::InvalidArgument);
}

#[test]
fn matrix_inclusions() {
    let cases = [
        (MatrixKind::Scalar(2), 16, 12),
        (MatrixKind::Block { n: 2, blocks: vec![(2, 1)] }, 4, 0),
        (MatrixKind::Diagonal(2), 8, 4),
        (MatrixKind::Block { n: 3, blocks: vec![(1, 1), (2, 1)] }, 18, 9),
    ];
    for (kind, dim_c, dim_omega) in cases {
        assert_eq!(kind.oracle_dim_c(), dim_c);
        assert_eq!(kind.oracle_dim_omega(), dim_omega);
        let inst = build(Source::Matrix(kind.clone()));
        let co = inst.coalgebra().unwrap();
        assert_eq!(co.dim(), dim_c, "{kind:?}");
        assert_eq!(inst.omega(co).unwrap().unwrap().dim(), dim_omega, "{kind:?}");
    }
}

#[test]
fn identity_inclusion_coalgebra_is_m2() {
    let inst = build(Source::Matrix(MatrixKind::Block { n: 2, blocks: vec![(2, 1)] }));
    let co = inst.coalgebra().unwrap();
    // ε: C → B is a bijection.
    assert_eq!(linalg::rank(co.eps(), tol()), 4);
}

#[test]
fn blocks_must_fill_the_matrix() {
    let e = MatrixKind::Block { n: 3, blocks: vec![(1, 1), (1, 1)] }.inclusion::<f64>(tol()).unwrap_err();
    assert_eq!(e.kind, Kind::InconsistentMultiplicities);
    let e = MatrixKind::Block { n: 2, blocks: vec![(2, 0), (1, 2)] }.inclusion::<f64>(tol()).unwrap_err();
    assert_eq!(e.kind, Kind::InconsistentMultiplicities);
}

#[test]
fn standard_sources_cover_the_gallery() {
    let names: Vec<String> = gallery::standard_sources().into_iter().map(|(n, _)| n).collect();
    let count = |p: &str| names.iter().filter(|n| n.starts_with(p)).count();
    assert_eq!(count("covering-"), 3);
    assert!(count("group-") >= 4);
    assert!(names.contains(&"group-s3".to_string()));
    assert!(count("scalar-") + count("diagonal-") + count("full-") + count("block-") >= 2);
}

#[test]
fn generated_objects_validate() {
    for (name, source) in gallery::standard_sources() {
        if name == "group-z8" || name == "group-d4" || name == "group-q8" || name == "block-1+2-m3" {
            continue; // exercised end to end in the acceptance suite
        }
        let inst = build(source);
        assert!(inst.correspondence.checks().all_pass(), "{name}");
        for (m, x) in inst.standard_modules().unwrap() {
            assert!(x.checks().all_pass(), "{name}/{m}");
        }
        let co = inst.coalgebra().unwrap();
        assert_eq!(co.dim(), inst.oracle.dim_c, "{name}");
        if let Some(om) = inst.omega(co) {
            assert_eq!(Some(om.unwrap().dim()), inst.oracle.dim_omega, "{name}");
        }
    }
}
