//! Thin wrappers over the dense factorizations used throughout.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Pivot ratio below which a factorization is reported singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-14;

/// LU factorization with partial pivoting and a pivot-ratio diagnostic.
pub struct Lu {
    lu: PartialPivLu<f64>,
    pub pivot_ratio: f64,
}

impl Lu {
    pub fn new(a: MatRef<'_, f64>, context: &str) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!("{context}: {}x{} is not square", a.nrows(), a.ncols())));
        }
        let lu = a.partial_piv_lu();
        let u = lu.U();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..u.nrows() {
            let d = u[(i, i)].abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let pivot_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        if !(pivot_ratio > SINGULAR_PIVOT_RATIO) {
            return Err(Error::Singular { context: context.to_string(), pivot_ratio });
        }
        Ok(Self { lu, pivot_ratio })
    }

    pub fn solve(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        self.lu.solve(b)
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let x = self.lu.solve(column(b).as_ref());
        x.col_as_slice(0).to_vec()
    }
}

/// Single-column matrix holding `v`.
pub fn column(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

/// `a * x` for a dense matrix and a slice.
pub fn mat_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    let y = a * column(x).as_ref();
    y.col_as_slice(0).to_vec()
}

/// `a^T * x` for a dense matrix and a slice.
pub fn mat_t_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    mat_vec(a.transpose(), x)
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖a - b‖ / ‖b‖`, or the absolute norm when `b` vanishes.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let base = norm(b);
    if base > 0.0 {
        diff / base
    } else {
        diff
    }
}

/// Frobenius norm of `a - b`.
pub fn frobenius_diff(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    (a - b).norm_l2()
}
