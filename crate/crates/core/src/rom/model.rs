//! Reduced split and monolithic models and their online solves.

use faer::Mat;

use crate::bem::{combine_split, BemOperators, Operator, SolveMode, SwimSolution};
use crate::error::{Error, Result};
use crate::linalg::{column, mat_t_vec, mat_vec, Lu};
use crate::mesh::rigid::RigidKit;
use crate::rom::mdeim::{AffineExpansion, MAX_TERMS};
use crate::rom::pod::pod;
use crate::rom::snapshot::SnapshotSet;
use crate::swimmer::Swimmer;

/// Default energy fraction for traction bases and interpolation.
pub const DEFAULT_THRESHOLD: f64 = 0.9999;

#[derive(Clone, Debug, PartialEq)]
pub struct RomSettings {
    pub mode: SolveMode,
    /// Energy kept by traction bases.
    pub traction_threshold: f64,
    /// Energy kept by the velocity basis.
    pub velocity_threshold: f64,
    /// Energy kept by the operator expansions.
    pub eim_threshold: f64,
    pub max_eim_terms: usize,
    /// Upper bound on traction modes per system.
    pub max_modes: Option<usize>,
}

impl Default for RomSettings {
    fn default() -> Self {
        Self {
            mode: SolveMode::Split,
            traction_threshold: DEFAULT_THRESHOLD,
            velocity_threshold: DEFAULT_THRESHOLD,
            eim_threshold: DEFAULT_THRESHOLD,
            max_eim_terms: MAX_TERMS,
            max_modes: None,
        }
    }
}

/// One reduced traction system with its parameter-independent blocks.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub uf: Mat<f64>,
    /// `U_f^T V_i U_f` per expansion term.
    pub v_blocks: Vec<Mat<f64>>,
    /// `U_f^T K_i U_u` per expansion term.
    pub k_blocks: Vec<Mat<f64>>,
}

impl ReducedSystem {
    pub fn modes(&self) -> usize {
        self.uf.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct RomModel {
    pub mode: SolveMode,
    pub uu: Mat<f64>,
    /// Split: six rigid-mode systems then the shape system. Monolithic: one.
    pub systems: Vec<ReducedSystem>,
    pub v_exp: Option<AffineExpansion>,
    pub k_exp: Option<AffineExpansion>,
}

/// Operators available to an online solve.
pub enum OnlineOperators<'a> {
    /// Interpolation coefficients for `V` and `K`.
    Interpolated { theta_v: Vec<f64>, theta_k: Vec<f64> },
    /// Fully assembled operators, bypassing interpolation.
    Exact(&'a BemOperators),
}

fn weighted_sum(blocks: &[Mat<f64>], theta: &[f64]) -> Result<Mat<f64>> {
    if blocks.len() != theta.len() {
        return Err(Error::Dimension(format!("{} coefficients for {} blocks", theta.len(), blocks.len())));
    }
    let first = blocks.first().ok_or_else(|| Error::Incompatible("model holds no operator blocks".into()))?;
    let mut out = Mat::zeros(first.nrows(), first.ncols());
    for (b, &t) in blocks.iter().zip(theta) {
        out += Mat::from_fn(b.nrows(), b.ncols(), |i, j| t * b[(i, j)]);
    }
    Ok(out)
}

/// Concatenates matrices with equal row counts.
fn hcat(mats: &[&Mat<f64>]) -> Mat<f64> {
    let rows = mats.first().map_or(0, |m| m.nrows());
    let mut out = Mat::zeros(rows, mats.iter().map(|m| m.ncols()).sum());
    let mut c = 0;
    for m in mats {
        out.as_mut().subcols_mut(c, m.ncols()).copy_from(m.as_ref());
        c += m.ncols();
    }
    out
}

impl RomModel {
    /// Projects the expansion terms onto the given bases. The expansions must
    /// still hold their basis matrices; the model keeps copies without them.
    pub fn project(
        mode: SolveMode,
        uu: Mat<f64>,
        ufs: Vec<Mat<f64>>,
        v_exp: Option<&AffineExpansion>,
        k_exp: Option<&AffineExpansion>,
    ) -> Result<Self> {
        let expected = match mode {
            SolveMode::Split => 7,
            SolveMode::Monolithic => 1,
        };
        if ufs.len() != expected {
            return Err(Error::Dimension(format!("{} mode needs {expected} traction bases, got {}", mode.name(), ufs.len())));
        }
        let n = uu.nrows();
        if ufs.iter().any(|u| u.nrows() != n || u.ncols() == 0) || uu.ncols() == 0 {
            return Err(Error::Dimension("bases disagree on the number of unknowns or are empty".into()));
        }
        for exp in [v_exp, k_exp].into_iter().flatten() {
            if exp.size != n {
                return Err(Error::Dimension(format!("expansion of size {} for {n} unknowns", exp.size)));
            }
        }
        let all_uf = hcat(&ufs.iter().collect::<Vec<_>>());
        let offsets: Vec<usize> = ufs
            .iter()
            .scan(0, |acc, u| {
                let o = *acc;
                *acc += u.ncols();
                Some(o)
            })
            .collect();

        let mut v_blocks: Vec<Vec<Mat<f64>>> = vec![Vec::new(); ufs.len()];
        if let Some(exp) = v_exp {
            for per_term in exp.project(|a| a * &all_uf)? {
                for (s, uf) in ufs.iter().enumerate() {
                    v_blocks[s].push(uf.transpose() * per_term.as_ref().subcols(offsets[s], uf.ncols()));
                }
            }
        }
        let mut k_blocks: Vec<Vec<Mat<f64>>> = vec![Vec::new(); ufs.len()];
        if let Some(exp) = k_exp {
            for per_term in exp.project(|a| a * &uu)? {
                for (s, uf) in ufs.iter().enumerate() {
                    k_blocks[s].push(uf.transpose() * &per_term);
                }
            }
        }
        let systems = ufs
            .into_iter()
            .zip(v_blocks.into_iter().zip(k_blocks))
            .map(|(uf, (v_blocks, k_blocks))| ReducedSystem { uf, v_blocks, k_blocks })
            .collect();
        Ok(Self {
            mode,
            uu,
            systems,
            v_exp: v_exp.map(AffineExpansion::clone_without_basis),
            k_exp: k_exp.map(AffineExpansion::clone_without_basis),
        })
    }

    pub fn dof_count(&self) -> usize {
        self.uu.nrows()
    }

    pub fn velocity_modes(&self) -> usize {
        self.uu.ncols()
    }

    /// Traction basis size per system.
    pub fn traction_modes(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.modes()).collect()
    }

    /// Keeps at most `n` leading traction modes in every system.
    pub fn truncated(&self, n: usize) -> Self {
        let systems = self
            .systems
            .iter()
            .map(|s| {
                let m = n.clamp(1, s.modes());
                ReducedSystem {
                    uf: s.uf.as_ref().subcols(0, m).to_owned(),
                    v_blocks: s.v_blocks.iter().map(|b| b.as_ref().submatrix(0, 0, m, m).to_owned()).collect(),
                    k_blocks: s.k_blocks.iter().map(|b| b.as_ref().subrows(0, m).to_owned()).collect(),
                }
            })
            .collect();
        Self { mode: self.mode, uu: self.uu.clone(), systems, v_exp: self.v_exp.clone(), k_exp: self.k_exp.clone() }
    }

    /// Keeps the leading `q_v` and `q_k` expansion terms.
    pub fn with_eim_terms(&self, q_v: usize, q_k: usize) -> Result<Self> {
        let (v, k) = self.expansions()?;
        let (v, k) = (v.truncated(q_v), k.truncated(q_k));
        let systems = self
            .systems
            .iter()
            .map(|s| ReducedSystem {
                uf: s.uf.clone(),
                v_blocks: s.v_blocks[..v.terms()].to_vec(),
                k_blocks: s.k_blocks[..k.terms()].to_vec(),
            })
            .collect();
        Ok(Self { mode: self.mode, uu: self.uu.clone(), systems, v_exp: Some(v), k_exp: Some(k) })
    }

    fn expansions(&self) -> Result<(&AffineExpansion, &AffineExpansion)> {
        match (&self.v_exp, &self.k_exp) {
            (Some(v), Some(k)) => Ok((v, k)),
            _ => Err(Error::Incompatible("model was built without operator expansions".into())),
        }
    }

    /// Entries read from the full-order operators per online evaluation.
    pub fn online_entry_count(&self) -> usize {
        self.v_exp.as_ref().map_or(0, |e| e.terms()) + self.k_exp.as_ref().map_or(0, |e| e.terms())
    }

    /// Assembles the interpolation entries on `swimmer` and returns the
    /// coefficients.
    pub fn interpolate(&self, swimmer: &Swimmer) -> Result<OnlineOperators<'static>> {
        let (v, k) = self.expansions()?;
        if swimmer.dof_count() != self.dof_count() {
            return Err(Error::Incompatible(format!(
                "swimmer has {} DoF, model expects {}",
                swimmer.dof_count(),
                self.dof_count()
            )));
        }
        Ok(OnlineOperators::Interpolated { theta_v: v.online(&swimmer.mesh)?, theta_k: k.online(&swimmer.mesh)? })
    }

    /// Online solve with interpolated operators.
    pub fn solve(&self, swimmer: &Swimmer) -> Result<SwimSolution> {
        let ops = self.interpolate(swimmer)?;
        let kit = RigidKit::new(&swimmer.mesh, swimmer.x0);
        self.solve_with(&kit, &swimmer.shape_velocity, &ops)
    }

    fn reduced_operators(&self, s: &ReducedSystem, ops: &OnlineOperators<'_>) -> Result<(Mat<f64>, Mat<f64>)> {
        match ops {
            OnlineOperators::Interpolated { theta_v, theta_k } => {
                Ok((weighted_sum(&s.v_blocks, theta_v)?, weighted_sum(&s.k_blocks, theta_k)?))
            }
            OnlineOperators::Exact(full) => {
                if full.dof_count() != self.dof_count() {
                    return Err(Error::Incompatible("operators and model differ in size".into()));
                }
                let vn = s.uf.transpose() * (full.get(Operator::V) * &s.uf);
                let kn = s.uf.transpose() * (full.get(Operator::K) * &self.uu);
                Ok((vn, kn))
            }
        }
    }

    /// Online solve given the rigid kit, the shape velocity and the operators.
    pub fn solve_with(&self, kit: &RigidKit, v: &[f64], ops: &OnlineOperators<'_>) -> Result<SwimSolution> {
        let n = self.dof_count();
        if v.len() != n || kit.p.nrows() != n {
            return Err(Error::Dimension(format!("problem has {} unknowns, model {n}", v.len())));
        }
        match self.mode {
            SolveMode::Split => self.split(kit, v, ops),
            SolveMode::Monolithic => self.monolithic(kit, v, ops),
        }
    }

    fn split(&self, kit: &RigidKit, v: &[f64], ops: &OnlineOperators<'_>) -> Result<SwimSolution> {
        let n = self.dof_count();
        let mut f_rigid = Mat::zeros(n, 6);
        let mut f_shape = Vec::new();
        for (k, s) in self.systems.iter().enumerate() {
            let u = if k < 6 { kit.p.col_as_slice(k) } else { v };
            let un = mat_t_vec(self.uu.as_ref(), u);
            let (vn, kn) = self.reduced_operators(s, ops)?;
            let lu = Lu::new(vn.as_ref(), "reduced single-layer system")?;
            let fnv = lu.solve_vec(&mat_vec(kn.as_ref(), &un));
            let f = mat_vec(s.uf.as_ref(), &fnv);
            if k < 6 {
                f_rigid.col_as_slice_mut(k).copy_from_slice(&f);
            } else {
                f_shape = f;
            }
        }
        combine_split(kit, f_rigid, f_shape)
    }

    fn monolithic(&self, kit: &RigidKit, v: &[f64], ops: &OnlineOperators<'_>) -> Result<SwimSolution> {
        let s = &self.systems[0];
        let m = s.modes();
        let (vn, kn) = self.reduced_operators(s, ops)?;
        let kp = &kn * (self.uu.transpose() * &kit.p);
        let ptm_uf = &kit.ptm * &s.uf;
        let mut a = Mat::zeros(m + 6, m + 6);
        a.as_mut().submatrix_mut(0, 0, m, m).copy_from(&vn);
        for k in 0..6 {
            for i in 0..m {
                a[(i, m + k)] = -kp[(i, k)];
                a[(m + k, i)] = ptm_uf[(k, i)];
            }
        }
        let mut rhs = mat_vec(kn.as_ref(), &mat_t_vec(self.uu.as_ref(), v));
        rhs.extend_from_slice(&[0.0; 6]);
        let lu = Lu::new(a.as_ref(), "reduced monolithic system")?;
        let x = lu.solve(column(&rhs).as_ref());
        let x = x.col_as_slice(0);
        Ok(SwimSolution {
            f: mat_vec(s.uf.as_ref(), &x[..m]),
            p_dot: std::array::from_fn(|k| x[m + k]),
            f_rigid: None,
            f_shape: None,
            grand_resistance: None,
        })
    }
}

/// Interpolated `V` and `K` expansions from the matrix snapshots of `set`.
/// The snapshots are consumed.
pub fn build_expansions(set: &mut SnapshotSet, settings: &RomSettings) -> Result<(AffineExpansion, AffineExpansion)> {
    let n = set.dof;
    let vm = set.v_matrices.take().ok_or_else(|| Error::Incompatible("snapshot set holds no operators".into()))?;
    let v = AffineExpansion::offline(Operator::V, n, vm, settings.eim_threshold, settings.max_eim_terms)?;
    let km = set.k_matrices.take().ok_or_else(|| Error::Incompatible("snapshot set holds no operators".into()))?;
    let k = AffineExpansion::offline(Operator::K, n, km, settings.eim_threshold, settings.max_eim_terms)?;
    Ok((v, k))
}

/// Velocity and traction POD bases for the requested mode.
pub fn pod_bases(set: &SnapshotSet, settings: &RomSettings) -> Result<(Mat<f64>, Vec<Mat<f64>>)> {
    let uu = pod(set.velocity_matrix().as_ref(), settings.velocity_threshold, None)?.u;
    let ufs = match settings.mode {
        SolveMode::Split => (0..7)
            .map(|s| pod(set.traction_column(s).as_ref(), settings.traction_threshold, settings.max_modes).map(|b| b.u))
            .collect::<Result<Vec<_>>>()?,
        SolveMode::Monolithic => {
            vec![pod(set.traction_matrix().as_ref(), settings.traction_threshold, settings.max_modes)?.u]
        }
    };
    Ok((uu, ufs))
}

/// POD model from snapshots and prebuilt expansions.
pub fn build_pod_rom(
    set: &SnapshotSet,
    settings: &RomSettings,
    v_exp: &AffineExpansion,
    k_exp: &AffineExpansion,
) -> Result<RomModel> {
    let (uu, ufs) = pod_bases(set, settings)?;
    RomModel::project(settings.mode, uu, ufs, Some(v_exp), Some(k_exp))
}
