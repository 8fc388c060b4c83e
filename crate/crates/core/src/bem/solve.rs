//! Dirichlet-to-Neumann map and the split and monolithic swimming solves.

use faer::Mat;

use crate::bem::assembly::{assemble, BemOperators};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::linalg::{column, mat_vec, Lu};
use crate::mesh::bacterium::{build_head, BacteriumResolution};
use crate::mesh::rigid::RigidKit;
use crate::mesh::sphere::{face_centered_on_x, geodesic_sphere};
use crate::swimmer::Swimmer;

/// Tractions and rigid velocities of one swimming problem.
#[derive(Clone, Debug)]
pub struct SwimSolution {
    /// Total nodal traction.
    pub f: Vec<f64>,
    /// Linear then angular rigid velocity.
    pub p_dot: [f64; 6],
    /// Tractions of the six rigid modes (split path only).
    pub f_rigid: Option<Mat<f64>>,
    /// Traction of the shape velocity (split path only).
    pub f_shape: Option<Vec<f64>>,
    /// `P^T M F_rigid` (split path only).
    pub grand_resistance: Option<Mat<f64>>,
}

impl SwimSolution {
    pub fn linear_velocity(&self) -> Vec3 {
        Vec3::new(self.p_dot[0], self.p_dot[1], self.p_dot[2])
    }

    pub fn angular_velocity(&self) -> Vec3 {
        Vec3::new(self.p_dot[3], self.p_dot[4], self.p_dot[5])
    }
}

/// Factorized `V` paired with `K`, mapping boundary velocities to tractions.
pub struct DirichletToNeumann<'a> {
    ops: &'a BemOperators,
    lu: Lu,
}

impl<'a> DirichletToNeumann<'a> {
    pub fn new(ops: &'a BemOperators) -> Result<Self> {
        let lu = Lu::new(ops.v.as_ref(), "single-layer matrix V")?;
        Ok(Self { ops, lu })
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.ops.dof_count() {
            return Err(Error::Dimension(format!(
                "velocity has {} entries, operators have {}",
                u.len(),
                self.ops.dof_count()
            )));
        }
        Ok(self.lu.solve_vec(&mat_vec(self.ops.k.as_ref(), u)))
    }

    /// Columnwise map of a velocity matrix.
    pub fn apply_mat(&self, u: &Mat<f64>) -> Mat<f64> {
        self.lu.solve((&self.ops.k * u).as_ref())
    }
}

/// Solves `V f = K u`.
pub fn dirichlet_to_neumann(ops: &BemOperators, u: &[f64]) -> Result<Vec<f64>> {
    DirichletToNeumann::new(ops)?.apply(u)
}

/// Seven traction solves combined through the force and torque balance.
pub fn split_solve(ops: &BemOperators, kit: &RigidKit, v: &[f64]) -> Result<SwimSolution> {
    let dn = DirichletToNeumann::new(ops)?;
    let f_shape = dn.apply(v)?;
    let f_rigid = dn.apply_mat(&kit.p);
    combine_split(kit, f_rigid, f_shape)
}

/// Balance step of the split approach from precomputed mode tractions.
pub fn combine_split(kit: &RigidKit, f_rigid: Mat<f64>, f_shape: Vec<f64>) -> Result<SwimSolution> {
    let a = &kit.ptm * &f_rigid;
    let b = mat_vec(kit.ptm.as_ref(), &f_shape);
    let lu = Lu::new(a.as_ref(), "grand resistance matrix")?;
    let x = lu.solve_vec(&b);
    let p_dot: [f64; 6] = std::array::from_fn(|k| -x[k]);
    let mut f = mat_vec(f_rigid.as_ref(), &p_dot);
    for (fi, si) in f.iter_mut().zip(&f_shape) {
        *fi += si;
    }
    Ok(SwimSolution { f, p_dot, f_rigid: Some(f_rigid), f_shape: Some(f_shape), grand_resistance: Some(a) })
}

/// One saddle-point solve for tractions and rigid velocities together.
pub fn monolithic_solve(ops: &BemOperators, kit: &RigidKit, v: &[f64]) -> Result<SwimSolution> {
    let nd = ops.dof_count();
    if v.len() != nd {
        return Err(Error::Dimension(format!("shape velocity has {} entries, expected {nd}", v.len())));
    }
    let kp = &ops.k * &kit.p;
    let mut a = Mat::zeros(nd + 6, nd + 6);
    for j in 0..nd {
        for i in 0..nd {
            a[(i, j)] = ops.v[(i, j)];
        }
        for k in 0..6 {
            a[(nd + k, j)] = kit.ptm[(k, j)];
        }
    }
    for k in 0..6 {
        for i in 0..nd {
            a[(i, nd + k)] = -kp[(i, k)];
        }
    }
    let mut rhs = mat_vec(ops.k.as_ref(), v);
    rhs.extend_from_slice(&[0.0; 6]);
    let lu = Lu::new(a.as_ref(), "monolithic saddle system")?;
    let x = lu.solve(column(&rhs).as_ref());
    let x = x.col_as_slice(0);
    Ok(SwimSolution {
        f: x[..nd].to_vec(),
        p_dot: std::array::from_fn(|k| x[nd + k]),
        f_rigid: None,
        f_shape: None,
        grand_resistance: None,
    })
}

/// Which full-order formulation to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    Split,
    Monolithic,
}

impl SolveMode {
    pub fn name(self) -> &'static str {
        match self {
            SolveMode::Split => "split",
            SolveMode::Monolithic => "monolithic",
        }
    }
}

impl std::str::FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split" => Ok(SolveMode::Split),
            "monolithic" => Ok(SolveMode::Monolithic),
            other => Err(Error::Config(format!("unknown solve mode '{other}'"))),
        }
    }
}

/// Full-order solve of a swimmer from scratch.
pub fn solve_swimmer(swimmer: &Swimmer, mode: SolveMode) -> Result<SwimSolution> {
    let ops = assemble(&swimmer.mesh)?;
    let kit = RigidKit::new(&swimmer.mesh, swimmer.x0);
    match mode {
        SolveMode::Split => split_solve(&ops, &kit, &swimmer.shape_velocity),
        SolveMode::Monolithic => monolithic_solve(&ops, &kit, &swimmer.shape_velocity),
    }
}

/// Drag of an isolated sphere mesh translating at unit speed along `x`.
pub fn sphere_drag(mesh: &crate::mesh::SurfaceMesh, center: Vec3) -> Result<f64> {
    let ops = assemble(mesh)?;
    let kit = RigidKit::new(mesh, center);
    let f = dirichlet_to_neumann(&ops, kit.p.col_as_slice(0))?;
    Ok(-kit.resultant(&f)[0])
}

/// Drag coefficient of the bacterium head alone, on the head mesh of the
/// given resolution.
pub fn drag_coefficient_head(r_head: f64, res: &BacteriumResolution) -> Result<f64> {
    if !(r_head > 0.0) {
        return Err(Error::InvalidParameter(format!("head radius {r_head} must be positive")));
    }
    sphere_drag(&build_head(r_head, res)?, Vec3::zeros())
}

/// Drag coefficient of a sphere at an explicit geodesic frequency.
pub fn sphere_drag_coefficient(radius: f64, frequency: usize) -> Result<f64> {
    let mesh = geodesic_sphere(radius, Vec3::zeros(), frequency, &face_centered_on_x(frequency)?)?;
    sphere_drag(&mesh, Vec3::zeros())
}
