//! Quantities of interest built on top of the solvers.

pub mod additive;
pub mod efficiency;
pub mod optimize;
pub mod stroke;

pub use efficiency::{axial_velocity, lighthill_efficiency, EfficiencyRecord, Provenance};
pub use stroke::{integrate_rigid_motion, reconstruct_stroke, StrokeReconstruction, StrokeTrajectory};
