#![allow(dead_code)]

use rand::Rng;
use twinview_core::split::rng;
use twinview_core::{Matrix, Vector};

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut r = rng(seed);
    Matrix::from_fn(rows, cols, |_, _| r.gen_range(-2.0..2.0))
}

/// Textbook Gaussian elimination with partial pivoting on a dense row-major
/// copy; deliberately independent of nalgebra's factorizations.
pub fn gauss_solve(a: &Matrix, b: &Vector) -> Vec<f64> {
    let n = a.nrows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)]).chain([b[i]]).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    num / den
}
