//! Independent oracles shared by the integration tests. Nothing here calls into the
//! crate's decompositions.
#![allow(dead_code)]

use cstar_descent::{Matrix, Tolerance, Vector};
use num_complex::Complex64;

pub const TOL: f64 = 1e-9;

pub fn tol() -> Tolerance {
    Tolerance::default_for::<f64>()
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
}

pub fn unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut e = Matrix::zeros(n, n);
    e[(i, j)] = c(1.0);
    e
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rank by modified Gram–Schmidt with column pivoting, relative cut `rel`.
pub fn gs_rank(vectors: &[Vector], rel: f64) -> usize {
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rest: Vec<Vector> = vectors.to_vec();
    let mut basis: Vec<Vector> = Vec::new();
    loop {
        let (k, best) = rest
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.norm()))
            .fold((usize::MAX, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if k == usize::MAX || best <= rel * scale {
            return basis.len();
        }
        let q = rest.swap_remove(k) / c(best);
        for v in rest.iter_mut() {
            let p = q.dotc(v);
            *v -= &q * p;
        }
        basis.push(q);
    }
}

pub fn columns(m: &Matrix) -> Vec<Vector> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}

pub fn gs_rank_of(m: &Matrix, rel: f64) -> usize {
    gs_rank(&columns(m), rel)
}

/// Row-major vectorization, matching `i * cols + j`.
pub fn vec_rows(m: &Matrix) -> Vector {
    Vector::from_iterator(m.len(), m.transpose().iter().copied())
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Dimension of `X ⊗_A Y` for matrices `x_k` (right action on X, as acting on column
/// coordinates) and `y_k` (left action on Y): full dimension minus the rank of the span of
/// `x·a ⊗ y − x ⊗ a·y` over all basis pairs, enumerated elementwise.
pub fn brute_balanced_dim(right_x: &[Matrix], left_y: &[Matrix]) -> usize {
    let (n, m) = (right_x[0].nrows(), left_y[0].nrows());
    let mut rels = Vec::new();
    for (rx, ly) in right_x.iter().zip(left_y) {
        for i in 0..n {
            for j in 0..m {
                let mut v = Vector::zeros(n * m);
                for p in 0..n {
                    v[p * m + j] += rx[(p, i)];
                }
                for q in 0..m {
                    v[i * m + q] -= ly[(q, j)];
                }
                rels.push(v);
            }
        }
    }
    n * m - gs_rank(&rels, 1e-9)
}
