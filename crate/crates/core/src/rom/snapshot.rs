//! Full-order snapshots over a parameter set.

use faer::Mat;

use crate::bem::{assemble, split_solve, BemOperators, SwimSolution};
use crate::error::{Error, Result};
use crate::mesh::rigid::RigidKit;
use crate::rom::mdeim::vectorize_into;
use crate::swimmer::{Swimmer, SwimmerFamily};

/// Full-order data at one parameter value.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub mu: Vec<f64>,
    /// `[P | v]`, N_delta x 7.
    pub velocities: Mat<f64>,
    /// `[F_rigid | f_shape]`, N_delta x 7.
    pub tractions: Mat<f64>,
    pub p_dot: [f64; 6],
    /// Total traction `F_rigid p_dot + f_shape`.
    pub traction: Vec<f64>,
}

impl Snapshot {
    pub fn f_shape(&self) -> &[f64] {
        self.tractions.col_as_slice(6)
    }
}

/// Snapshots of one family, optionally with vectorized operators.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    pub dof: usize,
    pub samples: Vec<Snapshot>,
    /// Row-major vectorized `V(mu_j)` in column `j`.
    pub v_matrices: Option<Mat<f64>>,
    pub k_matrices: Option<Mat<f64>>,
}

impl SnapshotSet {
    pub fn params(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.mu.clone()).collect()
    }

    /// Velocity snapshots `[P | v]` of every sample side by side.
    pub fn velocity_matrix(&self) -> Mat<f64> {
        stack(self.samples.iter().map(|s| &s.velocities))
    }

    /// Traction snapshots of one system column (0..6 rigid, 6 shape).
    pub fn traction_column(&self, system: usize) -> Mat<f64> {
        Mat::from_fn(self.dof, self.samples.len(), |i, j| self.samples[j].tractions[(i, system)])
    }

    /// All traction snapshots `[F_rigid | f_shape]` side by side.
    pub fn traction_matrix(&self) -> Mat<f64> {
        stack(self.samples.iter().map(|s| &s.tractions))
    }
}

fn stack<'a>(mats: impl Iterator<Item = &'a Mat<f64>>) -> Mat<f64> {
    let mats: Vec<&Mat<f64>> = mats.collect();
    let rows = mats.first().map_or(0, |m| m.nrows());
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c = 0;
    for m in mats {
        out.as_mut().subcols_mut(c, m.ncols()).copy_from(m.as_ref());
        c += m.ncols();
    }
    out
}

/// Full-order problem at one parameter: swimmer, operators, rigid kit and
/// split solution.
pub struct FullOrder {
    pub swimmer: Swimmer,
    pub ops: BemOperators,
    pub kit: RigidKit,
    pub solution: SwimSolution,
}

impl FullOrder {
    pub fn solve(family: &dyn SwimmerFamily, mu: &[f64]) -> Result<Self> {
        let swimmer = family.build(mu)?;
        let ops = assemble(&swimmer.mesh)?;
        let kit = RigidKit::new(&swimmer.mesh, swimmer.x0);
        let solution = split_solve(&ops, &kit, &swimmer.shape_velocity)?;
        Ok(Self { swimmer, ops, kit, solution })
    }

    pub fn snapshot(&self, mu: &[f64]) -> Snapshot {
        let n = self.swimmer.dof_count();
        let mut velocities = Mat::zeros(n, 7);
        velocities.as_mut().subcols_mut(0, 6).copy_from(self.kit.p.as_ref());
        velocities.col_as_slice_mut(6).copy_from_slice(&self.swimmer.shape_velocity);
        let mut tractions = Mat::zeros(n, 7);
        let f_rigid = self.solution.f_rigid.as_ref().expect("split solution");
        tractions.as_mut().subcols_mut(0, 6).copy_from(f_rigid.as_ref());
        tractions
            .col_as_slice_mut(6)
            .copy_from_slice(self.solution.f_shape.as_ref().expect("split solution"));
        Snapshot {
            mu: mu.to_vec(),
            velocities,
            tractions,
            p_dot: self.solution.p_dot,
            traction: self.solution.f.clone(),
        }
    }
}

/// Solves the full-order problem at every parameter. With `matrices`, the
/// assembled operators are kept vectorized for empirical interpolation.
pub fn collect_snapshots(family: &dyn SwimmerFamily, params: &[Vec<f64>], matrices: bool) -> Result<SnapshotSet> {
    if params.is_empty() {
        return Err(Error::InvalidParameter("empty training set".into()));
    }
    let n = family.dof_count();
    let (mut vm, mut km) = if matrices {
        (Some(Mat::zeros(n * n, params.len())), Some(Mat::zeros(n * n, params.len())))
    } else {
        (None, None)
    };
    let mut samples = Vec::with_capacity(params.len());
    for (j, mu) in params.iter().enumerate() {
        if mu.len() != family.dimension() {
            return Err(Error::Dimension(format!(
                "parameter {mu:?} has {} entries, family takes {}",
                mu.len(),
                family.dimension()
            )));
        }
        let fo = FullOrder::solve(family, mu).map_err(|e| e.in_phase(format!("snapshot at {mu:?}")))?;
        if fo.swimmer.dof_count() != n {
            return Err(Error::Dimension(format!(
                "mesh at {mu:?} has {} DoF, family declares {n}",
                fo.swimmer.dof_count()
            )));
        }
        if let (Some(vm), Some(km)) = (vm.as_mut(), km.as_mut()) {
            vectorize_into(fo.ops.v.as_ref(), vm, j);
            vectorize_into(fo.ops.k.as_ref(), km, j);
        }
        samples.push(fo.snapshot(mu));
    }
    Ok(SnapshotSet { dof: n, samples, v_matrices: vm, k_matrices: km })
}

/// Tensor grid over a box, first parameter varying slowest.
pub fn grid(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
            .collect(),
    }
}
