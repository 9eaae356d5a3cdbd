mod common;

use common::*;
use cstar_descent::algebra::{FiniteCStarAlgebra, Inclusion};
use cstar_descent::linalg::{self, Subspace};
use cstar_descent::{Kind, Matrix, Vector};
use proptest::prelude::*;
use std::sync::Arc;

fn line(v: &[f64]) -> Subspace<f64> {
    let m = real_matrix(v.len(), 1, v);
    linalg::image(&m, tol())
}

#[test]
fn kernel_of_identity_is_zero() {
    let k = linalg::kernel(&Matrix::identity(2, 2), tol());
    assert_eq!(k.dim(), 0);
    assert_eq!(k.ambient, 2);
}

#[test]
fn kernel_of_row_of_ones() {
    let k = linalg::kernel(&real_matrix(1, 2, &[1.0, 1.0]), tol());
    assert_eq!(k.dim(), 1);
    let v = k.basis.column(0);
    let ratio = v[0] / v[1];
    assert!((ratio - c(-1.0)).norm() < TOL);
    assert!((v.norm() - 1.0).abs() < TOL);
}

#[test]
fn kernel_of_rank_two_product() {
    let f = real_matrix(5, 2, &[1.0, 0.5, -2.0, 1.0, 0.3, 0.7, 4.0, -1.0, 0.0, 2.0]);
    let g = real_matrix(2, 3, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
    let m = &f * &g;
    assert_eq!(gs_rank_of(&m, 1e-9), 2);
    let k = linalg::kernel(&m, tol());
    assert_eq!(k.dim(), 3 - gs_rank_of(&m, 1e-9));
    assert!(max_abs(&(&m * &k.basis)) < TOL * 10.0);
}

#[test]
fn subspace_equality_examples() {
    let s = line(&[1.0, 2.0]);
    assert!(linalg::subspace_equal(&s, &s, tol()).unwrap());
    assert!(!linalg::subspace_equal(&line(&[1.0, 0.0]), &line(&[0.0, 1.0]), tol()).unwrap());
    assert!(linalg::subspace_equal(&line(&[1.0, 1.0]), &line(&[2.0, 2.0]), tol()).unwrap());
}

#[test]
fn subspaces_in_different_ambients_are_a_shape_error() {
    let e = linalg::subspace_equal(&line(&[1.0]), &line(&[1.0, 0.0]), tol()).unwrap_err();
    assert_eq!(e.kind, Kind::ShapeMismatch);
}

#[test]
fn solve_in_span_examples() {
    let id = Matrix::identity(2, 2);
    let x = linalg::solve_in_span(&[id.clone()], &(&id * c(3.0)), tol()).unwrap().unwrap();
    assert!((x[0] - c(3.0)).norm() < TOL);

    let none = linalg::solve_in_span(&[unit(2, 0, 0), unit(2, 1, 1)], &unit(2, 0, 1), tol()).unwrap();
    assert!(none.is_none());

    let d = real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let t = real_matrix(2, 2, &[2.0, 0.0, 0.0, 0.0]);
    let x = linalg::solve_in_span(&[id, d], &t, tol()).unwrap().unwrap();
    assert!((x[0] - c(1.0)).norm() < TOL && (x[1] - c(1.0)).norm() < TOL);
}

#[test]
fn psd_examples() {
    assert!(linalg::is_psd(&Matrix::identity(3, 3), tol()).unwrap());
    assert!(!linalg::is_psd(&real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]), tol()).unwrap());
    let g = real_matrix(3, 2, &[1.0, 2.0, -3.0, 0.5, 0.0, 1.0]);
    assert!(linalg::is_psd(&(g.adjoint() * &g), tol()).unwrap());
}

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols).prop_map(move |v| {
        Matrix::from_iterator(rows, cols, v.into_iter().map(|(a, b)| num_complex::Complex64::new(a, b)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_plus_rank_is_column_count(f in complex_matrix(6, 3), g in complex_matrix(3, 5)) {
        let m = &f * &g;
        let k = linalg::kernel(&m, tol());
        prop_assert_eq!(k.dim() + linalg::rank(&m, tol()), 5);
        prop_assert_eq!(linalg::rank(&m, tol()), gs_rank_of(&m, 1e-9));
        prop_assert!(max_abs(&(&m * &k.basis)) <= 1e-9 * max_abs(&m).max(1.0) * 10.0);
        let gram = k.basis.adjoint() * &k.basis;
        prop_assert!(max_abs(&(gram - Matrix::identity(k.dim(), k.dim()))) < 1e-12);
    }

    #[test]
    fn subspace_equality_is_invariant_under_basis_change(a in complex_matrix(5, 2), g in complex_matrix(2, 2)) {
        prop_assume!(linalg::rank(&g, tol()) == 2 && linalg::rank(&a, tol()) == 2);
        let s1 = linalg::image(&a, tol());
        let s2 = linalg::image(&(&a * &g), tol());
        prop_assert!(linalg::subspace_equal(&s1, &s2, tol()).unwrap());
        prop_assert!(linalg::subspace_equal(&s2, &s1, tol()).unwrap());
    }

    #[test]
    fn gram_matrices_are_psd(g in complex_matrix(4, 3)) {
        prop_assert!(linalg::is_psd(&(g.adjoint() * &g), tol()).unwrap());
    }
}

#[test]
fn scalar_algebra_on_c2() {
    let a = FiniteCStarAlgebra::<f64>::validate(vec![Matrix::identity(2, 2)], tol()).unwrap();
    assert_eq!(a.dim(), 1);
    assert!((a.unit()[0] - c(1.0)).norm() < TOL);
    assert!(a.checks().all_pass());
}

#[test]
fn matrix_units_give_m2() {
    let basis = vec![unit(2, 0, 0), unit(2, 0, 1), unit(2, 1, 0), unit(2, 1, 1)];
    let a = FiniteCStarAlgebra::<f64>::validate(basis, tol()).unwrap();
    let u = a.unit();
    let expected = [1.0, 0.0, 0.0, 1.0];
    for (k, e) in expected.iter().enumerate() {
        assert!((u[k] - c(*e)).norm() < TOL);
    }
    assert!(!a.is_commutative());
    // E12 · E21 = E11
    let p = a.multiply(&a.basis_vector(1), &a.basis_vector(2));
    assert!((&p - a.basis_vector(0)).norm() < TOL);
}

#[test]
fn block_idempotents_in_m3() {
    let p = &unit(3, 0, 0) + &unit(3, 1, 1);
    let q = unit(3, 2, 2);
    let a = FiniteCStarAlgebra::<f64>::validate(vec![p.clone(), q.clone()], tol()).unwrap();
    // All four products land back in span{p, q}.
    for x in [&p, &q] {
        for y in [&p, &q] {
            let prod = x * y;
            assert!(linalg::solve_in_span(&[p.clone(), q.clone()], &prod, tol()).unwrap().is_some());
        }
    }
    assert!(a.is_commutative());
    let u = a.unit();
    assert!((u[0] - c(1.0)).norm() < TOL && (u[1] - c(1.0)).norm() < TOL);
}

#[test]
fn non_closed_basis_is_rejected() {
    let e = FiniteCStarAlgebra::<f64>::validate(vec![Matrix::identity(2, 2), unit(2, 0, 1)], tol()).unwrap_err();
    assert_eq!(e.kind, Kind::NotStarClosed);
    let e = FiniteCStarAlgebra::<f64>::validate(vec![unit(2, 0, 1), unit(2, 1, 0)], tol()).unwrap_err();
    assert_eq!(e.kind, Kind::NotMultiplicativelyClosed);
}

#[test]
fn scalar_inclusion_into_m2() {
    let a = Arc::new(FiniteCStarAlgebra::<f64>::scalars(2, tol()).unwrap());
    let b = Arc::new(FiniteCStarAlgebra::<f64>::full_matrix(2, tol()).unwrap());
    let emb = real_matrix(4, 1, &[1.0, 0.0, 0.0, 1.0]);
    let inc = Inclusion::check(a, b, emb, tol()).unwrap();
    assert!(inc.checks().all_pass());
}

fn diag3() -> Arc<FiniteCStarAlgebra<f64>> {
    Arc::new(FiniteCStarAlgebra::diagonal(3, tol()).unwrap())
}

#[test]
fn functions_on_base_into_functions_on_cover() {
    let m = Arc::new(FiniteCStarAlgebra::<f64>::diagonal(2, tol()).unwrap());
    // (x, y) ↦ (x, x, y)
    let emb = real_matrix(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    let inc = Inclusion::check(m.clone(), diag3(), emb, tol()).unwrap();
    // Products of the diagonal idempotents, pushed forward, match products upstairs.
    for i in 0..2 {
        for j in 0..2 {
            let down = m.multiply(&m.basis_vector(i), &m.basis_vector(j));
            let up = inc.amb.multiply(&inc.embed(&m.basis_vector(i)), &inc.embed(&m.basis_vector(j)));
            assert!((inc.embed(&down) - up).norm() < TOL);
        }
    }
}

#[test]
fn corner_embedding_is_degenerate() {
    let a = Arc::new(FiniteCStarAlgebra::<f64>::diagonal(1, tol()).unwrap());
    let emb = real_matrix(3, 1, &[1.0, 0.0, 0.0]);
    let e = Inclusion::check(a, diag3(), emb, tol()).unwrap_err();
    assert_eq!(e.kind, Kind::Degenerate);
}

#[test]
fn embedding_of_wrong_shape() {
    let a = Arc::new(FiniteCStarAlgebra::<f64>::diagonal(2, tol()).unwrap());
    let e = Inclusion::check(a, diag3(), Matrix::zeros(2, 2), tol()).unwrap_err();
    assert_eq!(e.kind, Kind::ShapeMismatch);
}

fn m2_coords() -> impl Strategy<Value = Vector> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4)
        .prop_map(|v| Vector::from_iterator(4, v.into_iter().map(|(a, b)| num_complex::Complex64::new(a, b))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn m2_product_matches_matrix_product(x in m2_coords(), y in m2_coords(), z in m2_coords()) {
        let a = FiniteCStarAlgebra::<f64>::full_matrix(2, tol()).unwrap();
        let xy = a.multiply(&x, &y);
        prop_assert!(max_abs(&(a.rep(&xy) - a.rep(&x) * a.rep(&y))) < 1e-12);
        let assoc = a.multiply(&xy, &z) - a.multiply(&x, &a.multiply(&y, &z));
        prop_assert!(assoc.norm() < 1e-11);
        let unit = a.unit().clone();
        prop_assert!((a.multiply(&unit, &x) - &x).norm() < 1e-12);
        prop_assert!((a.involute(&a.involute(&x)) - &x).norm() < 1e-12);
        let anti = a.involute(&xy) - a.multiply(&a.involute(&y), &a.involute(&x));
        prop_assert!(anti.norm() < 1e-11);
        prop_assert!(max_abs(&(a.rep(&a.involute(&x)) - a.rep(&x).adjoint())) < 1e-12);
    }
}
