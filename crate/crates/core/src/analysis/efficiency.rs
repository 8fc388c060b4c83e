//! Axial velocity, motor torque and Lighthill efficiency of the bacterium.

use crate::bem::SwimSolution;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::rigid::RigidKit;
use crate::swimmer::Swimmer;

/// Where an efficiency value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Fom,
    Rom,
    Additive,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Fom => "FOM",
            Provenance::Rom => "ROM",
            Provenance::Additive => "AA",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EfficiencyRecord {
    pub n_lambda: f64,
    pub r_head: f64,
    pub u_axial: f64,
    pub t_motor: f64,
    pub k_head: f64,
    pub eta: f64,
    pub provenance: Provenance,
}

/// Projection of the linear velocity on the relative rotation axis,
/// `q̇ · (ω - Ω) / |ω - Ω|`.
pub fn axial_velocity(p_dot: &[f64; 6], relative_rotation: &Vec3) -> Result<f64> {
    let q = Vec3::new(p_dot[0], p_dot[1], p_dot[2]);
    let big_omega = Vec3::new(p_dot[3], p_dot[4], p_dot[5]);
    let axis = relative_rotation - big_omega;
    let n = axis.norm();
    if !(n > 0.0) {
        return Err(Error::Domain("relative rotation vanishes".into()));
    }
    Ok(q.dot(&axis) / n)
}

/// Force and torque about `kit.x0` exerted by the traction on a node range.
pub fn partial_resultant(kit: &RigidKit, f: &[f64], nodes: std::ops::Range<usize>) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (k, o) in out.iter_mut().enumerate() {
        *o = (3 * nodes.start..3 * nodes.end).map(|j| kit.ptm[(k, j)] * f[j]).sum();
    }
    out
}

/// Motor torque: minus the axial fluid torque on the tail, with the axis
/// oriented along the relative rotation.
pub fn motor_torque(swimmer: &Swimmer, kit: &RigidKit, f: &[f64]) -> Result<f64> {
    let motor = swimmer.motor.ok_or_else(|| Error::Domain("swimmer has no motor".into()))?;
    let tail = swimmer
        .component("tail")
        .ok_or_else(|| Error::Domain("swimmer has no tail".into()))?;
    let r = partial_resultant(kit, f, tail.nodes.clone());
    let torque = Vec3::new(r[3], r[4], r[5]);
    let e = motor.relative_rotation().normalize();
    Ok(-torque.dot(&e))
}

/// `η = K_head U² / (T_motor ω)`.
pub fn lighthill_efficiency(k_head: f64, u_axial: f64, t_motor: f64, rate: f64) -> Result<f64> {
    let power = t_motor * rate;
    if !(power > 0.0) {
        return Err(Error::Domain(format!("non-positive motor power {power:.3e}")));
    }
    Ok(k_head * u_axial * u_axial / power)
}

/// Efficiency record of a bacterium solution.
pub fn efficiency_record(
    swimmer: &Swimmer,
    kit: &RigidKit,
    solution: &SwimSolution,
    n_lambda: f64,
    r_head: f64,
    k_head: f64,
    provenance: Provenance,
) -> Result<EfficiencyRecord> {
    let motor = swimmer.motor.ok_or_else(|| Error::Domain("swimmer has no motor".into()))?;
    let u_axial = axial_velocity(&solution.p_dot, &motor.relative_rotation())?;
    let t_motor = motor_torque(swimmer, kit, &solution.f)?;
    let eta = lighthill_efficiency(k_head, u_axial, t_motor, motor.rate)?;
    Ok(EfficiencyRecord { n_lambda, r_head, u_axial, t_motor, k_head, eta, provenance })
}
