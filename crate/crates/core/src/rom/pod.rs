//! Proper orthogonal decomposition of snapshot matrices.

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest one are treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct PodBasis {
    /// Orthonormal modes, one per column.
    pub u: Mat<f64>,
    /// All singular values of the snapshot matrix, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Energy fraction captured by the retained modes.
    pub energy: f64,
}

impl PodBasis {
    pub fn len(&self) -> usize {
        self.u.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.u.ncols() == 0
    }
}

/// Number of leading values whose squared sum reaches `threshold` of the total.
pub fn energy_count(singular_values: &[f64], threshold: f64) -> usize {
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0;
    }
    let rank = singular_values
        .iter()
        .take_while(|&&s| s > RANK_TOLERANCE * singular_values[0])
        .count();
    let mut acc = 0.0;
    for (i, s) in singular_values.iter().enumerate().take(rank) {
        acc += s * s;
        if acc >= threshold * total * (1.0 - 1e-14) {
            return i + 1;
        }
    }
    rank
}

/// Fraction of the energy held by the first `n` values.
pub fn energy_fraction(singular_values: &[f64], n: usize) -> f64 {
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0.0;
    }
    singular_values.iter().take(n).map(|s| s * s).sum::<f64>() / total
}

fn validate_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter(format!("energy threshold {threshold} outside (0, 1]")));
    }
    Ok(())
}

/// POD by thin SVD, keeping the smallest number of modes reaching `threshold`
/// and at most `max_modes` when given.
pub fn pod(snapshots: MatRef<'_, f64>, threshold: f64, max_modes: Option<usize>) -> Result<PodBasis> {
    validate_threshold(threshold)?;
    if snapshots.ncols() == 0 {
        return Err(Error::EmptyBasis);
    }
    let svd = snapshots
        .thin_svd()
        .map_err(|e| Error::Decomposition(format!("snapshot SVD failed: {e:?}")))?;
    let s = svd.S().column_vector();
    let singular_values: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
    let mut n = energy_count(&singular_values, threshold);
    if let Some(cap) = max_modes {
        n = n.min(cap);
    }
    if n == 0 {
        return Err(Error::EmptyBasis);
    }
    let u = svd.U().subcols(0, n).to_owned();
    let energy = energy_fraction(&singular_values, n);
    Ok(PodBasis { u, singular_values, energy })
}

/// Appends `v` to an orthonormal basis by twice-iterated Gram-Schmidt.
/// Returns false, leaving the basis unchanged, when `v` is already in its
/// span to relative precision `tol`.
pub fn gram_schmidt_append(basis: &mut Mat<f64>, v: &[f64], tol: f64) -> bool {
    let n = basis.nrows();
    let norm0 = crate::linalg::norm(v);
    if norm0 == 0.0 {
        return false;
    }
    let mut w = v.to_vec();
    for _ in 0..2 {
        for k in 0..basis.ncols() {
            let col = basis.col_as_slice(k);
            let c = crate::linalg::dot(col, &w);
            for (wi, ci) in w.iter_mut().zip(col) {
                *wi -= c * ci;
            }
        }
    }
    let nw = crate::linalg::norm(&w);
    if nw <= tol * norm0 {
        return false;
    }
    let k = basis.ncols();
    let mut grown = Mat::zeros(n, k + 1);
    grown.subcols_mut(0, k).copy_from(basis.as_ref());
    for (i, wi) in w.iter().enumerate() {
        grown[(i, k)] = wi / nw;
    }
    *basis = grown;
    true
}
