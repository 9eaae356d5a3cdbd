mod common;

use common::*;
use cstar_descent::algebra::FiniteCStarAlgebra;
use cstar_descent::gallery::{self, Covering};
use cstar_descent::linalg;
use cstar_descent::module::{Action, Bimodule, Compacts, Correspondence, HilbertModule};
use cstar_descent::tensor::{balanced_tensor, exactness_check, interior_tensor};
use cstar_descent::{Kind, Matrix, Vector};
use proptest::prelude::*;
use rand::SeedableRng;
use std::sync::Arc;

type Alg = Arc<FiniteCStarAlgebra<f64>>;

fn m2() -> Alg {
    Arc::new(FiniteCStarAlgebra::full_matrix(2, tol()).unwrap())
}

fn diag(n: usize) -> Alg {
    Arc::new(FiniteCStarAlgebra::diagonal(n, tol()).unwrap())
}

fn covering() -> Covering {
    Covering::new(2, vec![0, 0, 1], vec![1, 1, 2]).unwrap()
}

/// Commutant dimension of the right action, from the linear system `T ρ(b) = ρ(b) T`.
fn commutant_dim(x: &HilbertModule<f64>) -> usize {
    let d = x.dim();
    let id = Matrix::identity(d, d);
    let mut rows = Vec::new();
    for a in x.action() {
        // row-major vec(T a − a T) = (I ⊗ aᵀ − a ⊗ I) vec(T)
        let block = kron(&id, &a.transpose()) - kron(a, &id);
        for r in 0..block.nrows() {
            rows.push(block.row(r).transpose());
        }
    }
    d * d - gs_rank(&rows, 1e-9)
}

#[test]
fn algebra_over_itself_has_product_inner_product() {
    let b = m2();
    let x = HilbertModule::over_itself(b.clone(), tol()).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let direct = b.basis()[i].adjoint() * &b.basis()[j];
            assert!(max_abs(&(b.rep(&x.gram_entry(i, j)) - direct)) < TOL);
        }
    }
    // Right action is right multiplication.
    for k in 0..4 {
        for i in 0..4 {
            let acted = x.action()[k].column(i).into_owned();
            assert!(max_abs(&(b.rep(&acted) - &b.basis()[i] * &b.basis()[k])) < TOL);
        }
    }
}

#[test]
fn column_module_over_c() {
    let x = HilbertModule::<f64>::column(2, tol()).unwrap();
    assert_eq!(x.dim(), 2);
    assert!(x.checks().all_pass());
}

#[test]
fn negative_gram_is_not_positive() {
    let c1 = Arc::new(FiniteCStarAlgebra::<f64>::scalars(1, tol()).unwrap());
    let gram = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let e = HilbertModule::validate(c1, vec![Matrix::identity(2, 2)], vec![gram], tol()).unwrap_err();
    assert_eq!(e.kind, Kind::NotPositive);
}

#[test]
fn gram_of_wrong_length_is_a_shape_error() {
    let e = HilbertModule::validate(m2(), vec![Matrix::identity(2, 2)], vec![Matrix::identity(2, 2)], tol())
        .unwrap_err();
    assert_eq!(e.kind, Kind::ShapeMismatch);
}

#[test]
fn double_adjoint_is_the_identity() {
    let f = Correspondence::from_inclusion(
        &gallery::MatrixKind::Scalar(2).inclusion(tol()).unwrap(),
        tol(),
    )
    .unwrap();
    let bi = f.bimodule();
    let back = bi.adjoint().adjoint();
    for (p, q) in [(&bi.left, &back.left), (&bi.right, &back.right)] {
        let (p, q) = (p.as_ref().unwrap(), q.as_ref().unwrap());
        for (a, b) in p.mats.iter().zip(&q.mats) {
            assert!(max_abs(&(a - b)) < 1e-14);
        }
    }
    // For F = M₂ the actions trade places.
    let adj = bi.adjoint();
    assert_eq!(adj.left.as_ref().unwrap().algebra.dim(), 4);
    assert_eq!(adj.right.as_ref().unwrap().algebra.dim(), 1);
}

#[test]
fn rank_one_operators_match_their_definition() {
    let x = gallery::bundle(diag(3), &[1, 1, 2], tol()).unwrap();
    let k = Compacts::of(&x).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for _ in 0..4 {
        let f: Vector = gallery::random_vector(x.dim(), &mut rng);
        let g: Vector = gallery::random_vector(x.dim(), &mut rng);
        // θ_{f,g}(h) = f·⟨g|h⟩ column by column
        let mut direct = Matrix::zeros(x.dim(), x.dim());
        for l in 0..x.dim() {
            let h = linalg::basis_vector(x.dim(), l);
            direct.set_column(l, &(x.act(&x.inner(&g, &h)) * &f));
        }
        let coords = k.rank_one(&x, &f, &g).unwrap();
        assert!(max_abs(&(k.operator(&coords) - &direct)) < 1e-10);
        let ff = k.rank_one(&x, &f, &f).unwrap();
        assert!(linalg::is_psd(&k.algebra.rep(&ff), tol()).unwrap());
    }
}

#[test]
fn compacts_of_small_modules() {
    let cn = HilbertModule::<f64>::column(3, tol()).unwrap();
    assert_eq!(Compacts::of(&cn).unwrap().dim(), 9);
    let b = HilbertModule::over_itself(m2(), tol()).unwrap();
    let k = Compacts::of(&b).unwrap();
    assert_eq!(k.dim(), 4);
    // K_B(B) = B by left multiplication
    for i in 0..4 {
        let left = m2().left_mult(&m2().basis_vector(i));
        assert!(k.coords(&left).is_some());
    }
}

#[test]
fn compacts_are_the_whole_commutant() {
    for x in [
        gallery::bundle(diag(3), &[1, 1, 2], tol()).unwrap(),
        HilbertModule::row(m2(), tol()).unwrap(),
        HilbertModule::over_itself(m2(), tol()).unwrap(),
    ] {
        assert_eq!(Compacts::of(&x).unwrap().dim(), commutant_dim(&x));
    }
}

#[test]
fn faithfulness_of_correspondences() {
    let f = Correspondence::<f64>::from_inclusion(&gallery::MatrixKind::Block { n: 2, blocks: vec![(2, 1)] }.inclusion(tol()).unwrap(), tol())
        .unwrap();
    assert!(f.faithful);
    let cov = Correspondence::<f64>::from_inclusion(&covering().inclusion(tol()).unwrap(), tol()).unwrap();
    assert!(cov.faithful);
    assert_eq!(linalg::rank(&cov.eta, tol()), 2);

    let c1 = HilbertModule::<f64>::column(1, tol()).unwrap();
    let left = vec![real_matrix(1, 1, &[1.0]), real_matrix(1, 1, &[0.0])];
    let g = Correspondence::new(diag(2), c1, left, tol()).unwrap();
    assert!(!g.faithful);
}

fn right_mats(b: &Bimodule<f64>) -> Vec<Matrix> {
    b.right.as_ref().unwrap().mats.clone()
}

fn left_mats(b: &Bimodule<f64>) -> Vec<Matrix> {
    b.left.as_ref().unwrap().mats.clone()
}

#[test]
fn algebra_tensor_algebra_is_the_algebra() {
    for a in [m2(), diag(3)] {
        let x = HilbertModule::over_itself(a.clone(), tol()).unwrap();
        let y = Bimodule {
            dim: a.dim(),
            left: Some(Action { algebra: a.clone(), mats: (0..a.dim()).map(|k| a.left_mult(&a.basis_vector(k))).collect() }),
            right: None,
        };
        let t = balanced_tensor(&x.as_bimodule(), &y, tol()).unwrap();
        assert_eq!(t.dim(), a.dim());
        assert_eq!(brute_balanced_dim(&right_mats(&x.as_bimodule()), &left_mats(&y)), a.dim());
    }
}

#[test]
fn covering_fibered_product_has_five_points() {
    let inc = covering().inclusion::<f64>(tol()).unwrap();
    let f = Correspondence::from_inclusion(&inc, tol()).unwrap();
    let l = f.bimodule();
    let r = l.adjoint();
    // B ⊗_A B with B = C(N), A = C(M)
    let t = balanced_tensor(&r, &l, tol()).unwrap();
    let fibered: usize = covering().fibers().iter().map(|f| f.len().pow(2)).sum();
    assert_eq!(fibered, 5);
    assert_eq!(t.dim(), fibered);
    assert_eq!(brute_balanced_dim(&right_mats(&r), &left_mats(&l)), fibered);
}

#[test]
fn row_tensor_column_over_m2_is_one_dimensional() {
    let row = HilbertModule::row(m2(), tol()).unwrap();
    // Column vectors with M₂ acting on the left by matrix multiplication.
    let col = Bimodule { dim: 2, left: Some(Action { algebra: m2(), mats: m2().basis().to_vec() }), right: None };
    let t = balanced_tensor(&row.as_bimodule(), &col, tol()).unwrap();
    assert_eq!(t.dim(), 1);
    assert_eq!(brute_balanced_dim(&right_mats(&row.as_bimodule()), &left_mats(&col)), 1);
}

#[test]
fn unit_module_tensor_f_is_f() {
    let inc = gallery::MatrixKind::Diagonal(2).inclusion::<f64>(tol()).unwrap();
    let f = Correspondence::from_inclusion(&inc, tol()).unwrap();
    let a = HilbertModule::over_itself(inc.sub.clone(), tol()).unwrap();
    let it = interior_tensor(&a, &f, tol()).unwrap();
    let m = f.module.dim();
    assert_eq!(it.module.dim(), m);
    // 1 ⊗ f_j has the inner products of f_j.
    let unit = inc.sub.unit().clone();
    let mut q = Matrix::zeros(it.module.dim(), m);
    for j in 0..m {
        let full = kron(&Matrix::from_column_slice(unit.len(), 1, unit.as_slice()), &Matrix::from_column_slice(m, 1, linalg::basis_vector::<f64>(m, j).as_slice()));
        q.set_column(j, &it.tensor.space.project(&full).column(0));
    }
    for i in 0..m {
        for j in 0..m {
            let lhs = it.module.inner(&q.column(i).into_owned(), &q.column(j).into_owned());
            assert!((lhs - f.module.gram_entry(i, j)).norm() < 1e-10);
        }
    }
}

#[test]
fn quotient_dimension_matches_brute_force() {
    let inc = covering().inclusion::<f64>(tol()).unwrap();
    let f = Correspondence::from_inclusion(&inc, tol()).unwrap();
    for dims in [vec![1, 2], vec![2, 1], vec![1, 1]] {
        let x = gallery::bundle(inc.sub.clone(), &dims, tol()).unwrap();
        let it = interior_tensor(&x, &f, tol()).unwrap();
        assert_eq!(it.module.dim(), brute_balanced_dim(x.action(), &f.left_action));
        assert!(it.checks.all_pass());
    }
}

#[test]
fn pullback_of_bundle_has_fiber_dims_1_1_2() {
    let inc = covering().inclusion::<f64>(tol()).unwrap();
    let f = Correspondence::from_inclusion(&inc, tol()).unwrap();
    let x = gallery::bundle(inc.sub.clone(), &[1, 2], tol()).unwrap();
    let it = interior_tensor(&x, &f, tol()).unwrap();
    // Fiberwise: point n of N sees the fiber of x at its image in M.
    let expected: Vec<usize> = covering().fiber_map.iter().map(|&m| [1, 2][m]).collect();
    assert_eq!(expected, vec![1, 1, 2]);
    assert_eq!(gallery::fiber_dims(&it.module), expected);
}

fn cover_as_base_module() -> (Bimodule<f64>, Bimodule<f64>) {
    let inc = covering().inclusion::<f64>(tol()).unwrap();
    let f = Correspondence::from_inclusion(&inc, tol()).unwrap();
    let right = (0..inc.sub.dim()).map(|k| inc.amb.right_mult(&inc.embed(&inc.sub.basis_vector(k)))).collect();
    let x = Bimodule { dim: 3, left: None, right: Some(Action { algebra: inc.sub.clone(), mats: right }) };
    (x, f.bimodule())
}

#[test]
fn exactness_extremes() {
    let (x, y) = cover_as_base_module();
    let (ok, _) = exactness_check(&x, &Matrix::identity(3, 3), &y, tol()).unwrap();
    assert!(ok);
    let (ok, _) = exactness_check(&x, &Matrix::zeros(3, 0), &y, tol()).unwrap();
    assert!(ok);
}

#[test]
fn exactness_for_functions_vanishing_at_a_point() {
    let (x, y) = cover_as_base_module();
    // I = functions on N vanishing at the third point.
    let sub = real_matrix(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let (ok, dist) = exactness_check(&x, &sub, &y, tol()).unwrap();
    assert!(ok, "distance {dist}");
    // Both sides have the dimension of I ⊗_A Y: the points of N ×_M N over the first fiber.
    let restricted: Vec<Matrix> = right_mats(&x).iter().map(|r| r.view((0, 0), (2, 2)).into_owned()).collect();
    assert_eq!(brute_balanced_dim(&restricted, &left_mats(&y)), 4);
}

#[test]
fn non_invariant_subspace_is_rejected() {
    let (x, y) = cover_as_base_module();
    let s = 0.5f64.sqrt();
    let sub = real_matrix(3, 1, &[s, 0.0, s]);
    assert_eq!(exactness_check(&x, &sub, &y, tol()).unwrap_err().kind, Kind::NotASubmodule);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_submodules_are_exact(seed in any::<u64>(), which in 0usize..3) {
        let inc = gallery::MatrixKind::Diagonal(2).inclusion::<f64>(tol()).unwrap();
        let f = Correspondence::from_inclusion(&inc, tol()).unwrap();
        let base = HilbertModule::over_itself(inc.sub.clone(), tol()).unwrap();
        let x = match which {
            0 => base,
            1 => HilbertModule::direct_sum(&[&base, &base]).unwrap(),
            _ => HilbertModule::from_projection(inc.sub.clone(), &inc.sub.basis_vector(0), tol()).unwrap(),
        };
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let sub = gallery::random_submodule(&x, &mut rng);
        let (ok, dist) = exactness_check(&x.as_bimodule(), &sub, &f.bimodule(), tol()).unwrap();
        prop_assert!(ok, "distance {}", dist);
    }

    #[test]
    fn inner_products_are_hermitian_and_positive(seed in any::<u64>()) {
        let x = gallery::bundle(diag(3), &[2, 1, 1], tol()).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let u: Vector = gallery::random_vector(x.dim(), &mut rng);
        let v: Vector = gallery::random_vector(x.dim(), &mut rng);
        let b = x.algebra();
        let uv = b.rep(&x.inner(&u, &v));
        let vu = b.rep(&x.inner(&v, &u));
        prop_assert!(max_abs(&(uv - vu.adjoint())) < 1e-10);
        prop_assert!(linalg::is_psd(&b.rep(&x.inner(&u, &u)), tol()).unwrap());
    }
}
