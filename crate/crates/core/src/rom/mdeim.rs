//! Matrix discrete empirical interpolation.
//!
//! Snapshots of an operator are vectorized row-major (`r * N + c`) into the
//! columns of a tall matrix. POD of those columns gives basis matrices `A_i`;
//! DEIM then picks one entry per basis matrix so that the operator at a new
//! parameter is recovered as `Σ Θ_i A_i` from the values at those entries.

use faer::{Mat, MatRef, Side};

use crate::bem::{assemble_entries, Operator};
use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::mesh::SurfaceMesh;
use crate::rom::pod::{energy_count, energy_fraction};

/// Largest number of affine terms kept per operator.
pub const MAX_TERMS: usize = 260;

const ROW_CHUNK: usize = 4096;

#[derive(Clone, Debug)]
pub struct AffineExpansion {
    pub op: Operator,
    /// Side length of the square operator.
    pub size: usize,
    /// Selected linear entry indices, one per term.
    pub entries: Vec<usize>,
    /// Basis values at the selected entries, `interp[(q, i)] = A_i[entries[q]]`.
    pub interp: Mat<f64>,
    pub singular_values: Vec<f64>,
    pub energy: f64,
    /// Vectorized basis matrices, one per column. Dropped once projected.
    pub basis: Option<Mat<f64>>,
}

/// Copies `a` row-major into column `col` of `dest`.
pub fn vectorize_into(a: MatRef<'_, f64>, dest: &mut Mat<f64>, col: usize) {
    let n = a.ncols();
    let out = dest.col_as_slice_mut(col);
    for r in 0..a.nrows() {
        for c in 0..n {
            out[r * n + c] = a[(r, c)];
        }
    }
}

/// View of a vectorized square matrix.
pub fn unvectorize(v: &[f64], size: usize) -> MatRef<'_, f64> {
    MatRef::from_row_major_slice(v, size, size)
}

/// POD of vectorized snapshots through the Gram matrix. The snapshot storage
/// is overwritten with the basis, which is returned in its leading columns.
fn snapshot_pod(mut s: Mat<f64>, threshold: f64, max_terms: usize) -> Result<(Mat<f64>, Vec<f64>, usize)> {
    let m = s.ncols();
    let gram = s.transpose() * &s;
    let eig = gram
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("snapshot Gram eigensolve failed: {e:?}")))?;
    // eigenvalues come in nondecreasing order
    let vals = eig.S().column_vector();
    let singular_values: Vec<f64> = (0..m).rev().map(|i| vals[i].max(0.0).sqrt()).collect();
    let q = energy_count(&singular_values, threshold).min(max_terms);
    if q == 0 {
        return Err(Error::EmptyBasis);
    }
    let vecs = eig.U();
    let w = Mat::from_fn(m, q, |i, k| vecs[(i, m - 1 - k)] / singular_values[k]);

    let rows = s.nrows();
    let mut start = 0;
    while start < rows {
        let len = ROW_CHUNK.min(rows - start);
        let block = s.as_ref().subrows(start, len) * &w;
        s.as_mut().submatrix_mut(start, 0, len, q).copy_from(&block);
        start += len;
    }
    s.truncate(rows, q);

    // one CholeskyQR pass restores orthonormality lost to the Gram squaring
    let c = s.transpose() * &s;
    let chol = c
        .llt(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("basis re-orthonormalization failed: {e:?}")))?;
    let l = chol.L().to_owned();
    let mut start = 0;
    while start < rows {
        let len = ROW_CHUNK.min(rows - start);
        // rows of U L^{-T}: solve L x = row^T
        let mut bt = s.as_ref().subrows(start, len).transpose().to_owned();
        l.solve_lower_triangular_in_place(bt.as_mut());
        s.as_mut().subrows_mut(start, len).copy_from(bt.transpose());
        start += len;
    }
    Ok((s, singular_values, q))
}

/// Classic DEIM point selection; ties go to the lowest index.
fn deim_indices(basis: MatRef<'_, f64>) -> Result<Vec<usize>> {
    let q = basis.ncols();
    let mut entries: Vec<usize> = Vec::with_capacity(q);
    for k in 0..q {
        let col = basis.col(k);
        let residual: Vec<f64> = if k == 0 {
            (0..basis.nrows()).map(|r| col[r]).collect()
        } else {
            let b = Mat::from_fn(k, k, |a, i| basis[(entries[a], i)]);
            let lu = Lu::new(b.as_ref(), "DEIM interpolation")?;
            let rhs: Vec<f64> = entries.iter().map(|&e| col[e]).collect();
            let c = lu.solve_vec(&rhs);
            let approx = basis.subcols(0, k) * crate::linalg::column(&c).as_ref();
            (0..basis.nrows()).map(|r| col[r] - approx[(r, 0)]).collect()
        };
        let mut best = 0;
        let mut best_val = -1.0;
        for (r, v) in residual.iter().enumerate() {
            if v.abs() > best_val {
                best_val = v.abs();
                best = r;
            }
        }
        if entries.contains(&best) {
            return Err(Error::Singular { context: "DEIM selected a duplicate entry".into(), pivot_ratio: 0.0 });
        }
        entries.push(best);
    }
    Ok(entries)
}

impl AffineExpansion {
    /// Builds the expansion from vectorized snapshots of an `size × size`
    /// operator, one snapshot per column.
    pub fn offline(op: Operator, size: usize, snapshots: Mat<f64>, threshold: f64, max_terms: usize) -> Result<Self> {
        if snapshots.ncols() == 0 {
            return Err(Error::EmptyBasis);
        }
        if snapshots.nrows() != size * size {
            return Err(Error::Dimension(format!(
                "{} snapshot rows for a {size}x{size} operator",
                snapshots.nrows()
            )));
        }
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidParameter(format!("energy threshold {threshold} outside (0, 1]")));
        }
        let (basis, singular_values, q) = snapshot_pod(snapshots, threshold, max_terms.max(1))?;
        let entries = deim_indices(basis.as_ref())?;
        let interp = Mat::from_fn(q, q, |a, i| basis[(entries[a], i)]);
        Lu::new(interp.as_ref(), "EIM interpolation matrix")?;
        let energy = energy_fraction(&singular_values, q);
        Ok(Self { op, size, entries, interp, singular_values, energy, basis: Some(basis) })
    }

    pub fn terms(&self) -> usize {
        self.entries.len()
    }

    /// Keeps the leading `q` terms. DEIM selections are nested, so the
    /// truncated expansion is the one a smaller basis would have produced.
    pub fn truncated(&self, q: usize) -> Self {
        let q = q.clamp(1, self.terms());
        Self {
            op: self.op,
            size: self.size,
            entries: self.entries[..q].to_vec(),
            interp: self.interp.as_ref().submatrix(0, 0, q, q).to_owned(),
            singular_values: self.singular_values.clone(),
            energy: energy_fraction(&self.singular_values, q),
            basis: self.basis.as_ref().map(|b| b.as_ref().subcols(0, q).to_owned()),
        }
    }

    /// Coefficients from operator values at the selected entries.
    pub fn coefficients(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.terms() {
            return Err(Error::Dimension(format!(
                "{} entry values for {} EIM terms",
                values.len(),
                self.terms()
            )));
        }
        let lu = Lu::new(self.interp.as_ref(), "EIM interpolation matrix")?;
        Ok(lu.solve_vec(values))
    }

    /// Assembles the selected entries on `mesh` and returns the coefficients.
    pub fn online(&self, mesh: &SurfaceMesh) -> Result<Vec<f64>> {
        if mesh.dof_count() != self.size {
            return Err(Error::Incompatible(format!(
                "mesh has {} DoF, expansion expects {}",
                mesh.dof_count(),
                self.size
            )));
        }
        let values = assemble_entries(mesh, self.op, &self.entries)?;
        self.coefficients(&values)
    }

    pub fn basis_matrix(&self, i: usize) -> Option<MatRef<'_, f64>> {
        self.basis.as_ref().map(|b| unvectorize(b.col_as_slice(i), self.size))
    }

    /// `Σ Θ_i A_i` as a dense matrix. Needs the basis.
    pub fn reconstruct(&self, theta: &[f64]) -> Result<Mat<f64>> {
        let basis = self
            .basis
            .as_ref()
            .ok_or_else(|| Error::Incompatible("expansion basis was dropped after projection".into()))?;
        if theta.len() != self.terms() {
            return Err(Error::Dimension(format!("{} coefficients for {} terms", theta.len(), self.terms())));
        }
        let flat = basis * crate::linalg::column(theta).as_ref();
        Ok(unvectorize(flat.col_as_slice(0), self.size).to_owned())
    }

    /// Applies `f` to every basis matrix and collects the results.
    pub fn project<T>(&self, mut f: impl FnMut(MatRef<'_, f64>) -> T) -> Result<Vec<T>> {
        let basis = self
            .basis
            .as_ref()
            .ok_or_else(|| Error::Incompatible("expansion basis was dropped after projection".into()))?;
        Ok((0..basis.ncols()).map(|i| f(unvectorize(basis.col_as_slice(i), self.size))).collect())
    }

    pub fn clone_without_basis(&self) -> Self {
        Self {
            op: self.op,
            size: self.size,
            entries: self.entries.clone(),
            interp: self.interp.clone(),
            singular_values: self.singular_values.clone(),
            energy: self.energy,
            basis: None,
        }
    }

    pub fn drop_basis(&mut self) {
        self.basis = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::linalg::solvers::Solve as _;

    fn affine_family(n: usize, mus: &[f64]) -> (Mat<f64>, Mat<f64>, Mat<f64>) {
        let a0 = Mat::from_fn(n, n, |i, j| 1.0 / (1.0 + i as f64 + 2.0 * j as f64));
        let a1 = Mat::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin());
        let mut s = Mat::zeros(n * n, mus.len());
        for (k, &mu) in mus.iter().enumerate() {
            let a = &a0 + Mat::from_fn(n, n, |i, j| mu * a1[(i, j)]);
            vectorize_into(a.as_ref(), &mut s, k);
        }
        (a0, a1, s)
    }

    #[test]
    fn constant_family_needs_one_term() {
        let n = 5;
        let a = Mat::from_fn(n, n, |i, j| (i as f64 - j as f64).cos() + 2.0);
        let mut s = Mat::zeros(n * n, 4);
        for k in 0..4 {
            vectorize_into(a.as_ref(), &mut s, k);
        }
        let e = AffineExpansion::offline(Operator::V, n, s, 0.9999, MAX_TERMS).unwrap();
        assert_eq!(e.terms(), 1);
        let vals: Vec<f64> = e.entries.iter().map(|&x| a[(x / n, x % n)]).collect();
        let m = e.reconstruct(&e.coefficients(&vals).unwrap()).unwrap();
        assert!((&m - &a).norm_l2() / a.norm_l2() < 1e-13);
    }

    #[test]
    fn two_term_family_is_recovered_off_training() {
        let n = 6;
        let (a0, a1, s) = affine_family(n, &[0.0, 0.5, 1.0, 2.0]);
        let e = AffineExpansion::offline(Operator::K, n, s, 1.0, MAX_TERMS).unwrap();
        assert_eq!(e.terms(), 2);
        let mu = 1.37;
        let a = &a0 + Mat::from_fn(n, n, |i, j| mu * a1[(i, j)]);
        let vals: Vec<f64> = e.entries.iter().map(|&x| a[(x / n, x % n)]).collect();
        let m = e.reconstruct(&e.coefficients(&vals).unwrap()).unwrap();
        assert!((&m - &a).norm_l2() / a.norm_l2() < 1e-12);
    }

    #[test]
    fn selected_entries_are_interpolated_exactly() {
        let n = 5;
        let mut s = Mat::zeros(n * n, 6);
        for k in 0..6 {
            let a = Mat::from_fn(n, n, |i, j| ((i + 1) as f64 * (k as f64 * 0.3 + j as f64)).sin());
            vectorize_into(a.as_ref(), &mut s, k);
        }
        let snaps = s.clone();
        let e = AffineExpansion::offline(Operator::V, n, s, 1.0, MAX_TERMS).unwrap();
        for k in 0..6 {
            let vals: Vec<f64> = e.entries.iter().map(|&x| snaps[(x, k)]).collect();
            let m = e.reconstruct(&e.coefficients(&vals).unwrap()).unwrap();
            for &x in &e.entries {
                assert!((m[(x / n, x % n)] - snaps[(x, k)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn entries_are_distinct_and_interp_nonsingular() {
        let n = 4;
        let mut s = Mat::zeros(n * n, 5);
        for k in 0..5 {
            let a = Mat::from_fn(n, n, |i, j| ((i * n + j) as f64).powi(k as i32 % 3) + k as f64 * (i as f64));
            vectorize_into(a.as_ref(), &mut s, k);
        }
        let e = AffineExpansion::offline(Operator::V, n, s, 1.0, MAX_TERMS).unwrap();
        let mut sorted = e.entries.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), e.terms());
        let lu = e.interp.partial_piv_lu();
        let x = lu.solve(Mat::<f64>::identity(e.terms(), e.terms()));
        assert!(x.norm_l2().is_finite());
    }

    #[test]
    fn truncation_keeps_leading_terms() {
        let n = 5;
        let mut s = Mat::zeros(n * n, 6);
        for k in 0..6 {
            let a = Mat::from_fn(n, n, |i, j| (1.0 + k as f64 * 0.2).powi((i + j) as i32 % 4));
            vectorize_into(a.as_ref(), &mut s, k);
        }
        let e = AffineExpansion::offline(Operator::V, n, s, 1.0, MAX_TERMS).unwrap();
        let t = e.truncated(2);
        assert_eq!(t.entries, e.entries[..2]);
        assert_eq!(t.interp.ncols(), 2);
    }

    #[test]
    fn zero_snapshots_fail() {
        let s = Mat::<f64>::zeros(9, 3);
        assert!(matches!(
            AffineExpansion::offline(Operator::V, 3, s, 0.9999, MAX_TERMS),
            Err(Error::EmptyBasis)
        ));
    }

    #[test]
    fn basis_is_orthonormal() {
        let n = 6;
        let (_, _, s) = affine_family(n, &[0.0, 0.5, 1.0, 2.0]);
        let e = AffineExpansion::offline(Operator::K, n, s, 1.0, MAX_TERMS).unwrap();
        let b = e.basis.as_ref().unwrap();
        let g = b.transpose() * b;
        assert!((&g - Mat::<f64>::identity(2, 2)).norm_l2() < 1e-12);
    }
}
