//! Rigid motion of a beating swimmer over one period.

use crate::bem::SolveMode;
use crate::error::{Error, Result};
use crate::geom::{UnitQuaternion, Vec3};
use crate::mesh::stroke::StrokeFamily;
use crate::rom::model::{build_expansions, build_pod_rom, RomSettings};
use crate::rom::snapshot::{collect_snapshots, FullOrder};
use crate::swimmer::SwimmerFamily;

/// Positions and orientations reached by integrating body-frame rigid
/// velocities.
#[derive(Clone, Debug)]
pub struct StrokeTrajectory {
    /// Body-frame rigid velocity per frame.
    pub p_dot: Vec<[f64; 6]>,
    /// Position at the start of each frame.
    pub positions: Vec<Vec3>,
    /// Body-to-lab rotation at the start of each frame.
    pub orientations: Vec<UnitQuaternion<f64>>,
    pub dt: f64,
    /// State after the last frame.
    pub final_position: Vec3,
    pub final_orientation: UnitQuaternion<f64>,
}

impl StrokeTrajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn net_displacement(&self) -> Vec3 {
        self.final_position - self.positions.first().copied().unwrap_or_else(Vec3::zeros)
    }
}

fn split6(p: &[f64; 6]) -> (Vec3, Vec3) {
    (Vec3::new(p[0], p[1], p[2]), Vec3::new(p[3], p[4], p[5]))
}

fn rotate_by(q: UnitQuaternion<f64>, omega: Vec3, dt: f64) -> UnitQuaternion<f64> {
    let mut next = q * UnitQuaternion::from_scaled_axis(omega * dt);
    next.renormalize();
    next
}

/// Explicit midpoint integration of periodic body-frame velocities, one
/// sample per frame, with exponential-map orientation updates.
pub fn integrate_rigid_motion(p_dot: &[[f64; 6]], dt: f64) -> Result<StrokeTrajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
    }
    let n = p_dot.len();
    let mut positions = Vec::with_capacity(n);
    let mut orientations = Vec::with_capacity(n);
    let mut q = Vec3::zeros();
    let mut rot = UnitQuaternion::identity();
    for i in 0..n {
        positions.push(q);
        orientations.push(rot);
        let (u0, w0) = split6(&p_dot[i]);
        let (u1, w1) = split6(&p_dot[(i + 1) % n]);
        let (um, wm) = (0.5 * (u0 + u1), 0.5 * (w0 + w1));
        let half = rotate_by(rot, 0.5 * (w0 + wm), 0.5 * dt);
        q += dt * (half * um);
        rot = rotate_by(rot, wm, dt);
    }
    Ok(StrokeTrajectory { p_dot: p_dot.to_vec(), positions, orientations, dt, final_position: q, final_orientation: rot })
}

/// Full-order rigid velocities at every frame of the period.
pub fn full_order_stroke(family: &StrokeFamily) -> Result<Vec<[f64; 6]>> {
    (0..family.params.frames)
        .map(|f| {
            FullOrder::solve(family, &[f as f64])
                .map(|fo| fo.solution.p_dot)
                .map_err(|e| e.in_phase(format!("full-order frame {f}")))
        })
        .collect()
}

/// Reduced reconstruction of one period against a full-order reference.
#[derive(Clone, Debug)]
pub struct StrokeReconstruction {
    pub training_frames: Vec<usize>,
    pub trajectory: StrokeTrajectory,
    /// `|U_rom - U_fom|` of the longitudinal velocity per frame.
    pub frame_errors: Vec<f64>,
    /// Relative discrete L2-in-time error of the longitudinal velocity.
    pub l2_error: f64,
}

/// Equi-spaced training frames.
pub fn training_frames(frames: usize, n_training: usize) -> Result<Vec<usize>> {
    if n_training < 2 || n_training > frames || frames % n_training != 0 {
        return Err(Error::InvalidParameter(format!(
            "{n_training} training frames must be at least 2 and divide {frames}"
        )));
    }
    Ok((0..frames).step_by(frames / n_training).collect())
}

/// Relative L2 error between two longitudinal velocity series.
pub fn longitudinal_error(rom: &[[f64; 6]], fom: &[[f64; 6]]) -> (Vec<f64>, f64) {
    let per: Vec<f64> = rom.iter().zip(fom).map(|(a, b)| (a[0] - b[0]).abs()).collect();
    let num: f64 = per.iter().map(|e| e * e).sum();
    let den: f64 = fom.iter().map(|b| b[0] * b[0]).sum();
    (per, (num / den).sqrt())
}

/// Trains a model on `n_training` equi-spaced frames and evaluates every
/// frame of the period. Returns the training frames and the velocities.
pub fn reduced_stroke(
    family: &StrokeFamily,
    n_training: usize,
    settings: &RomSettings,
) -> Result<(Vec<usize>, Vec<[f64; 6]>)> {
    let frames = family.params.frames;
    let training = training_frames(frames, n_training)?;
    let params: Vec<Vec<f64>> = training.iter().map(|&f| vec![f as f64]).collect();
    let mut set = collect_snapshots(family, &params, true)?;
    let (v, k) = build_expansions(&mut set, settings)?;
    let rom = build_pod_rom(&set, settings, &v, &k)?;
    drop((v, k));
    let p_dot = (0..frames)
        .map(|f| {
            let s = family.build(&[f as f64])?;
            rom.solve(&s).map(|sol| sol.p_dot).map_err(|e| e.in_phase(format!("reduced frame {f}")))
        })
        .collect::<Result<_>>()?;
    Ok((training, p_dot))
}

/// [`reduced_stroke`] compared against a full-order reference.
pub fn reconstruct_stroke(
    family: &StrokeFamily,
    n_training: usize,
    mode: SolveMode,
    settings: &RomSettings,
    reference: &[[f64; 6]],
) -> Result<StrokeReconstruction> {
    let frames = family.params.frames;
    if reference.len() != frames {
        return Err(Error::Dimension(format!("{} reference frames for a {frames}-frame period", reference.len())));
    }
    let settings = RomSettings { mode, ..settings.clone() };
    let (training, p_dot) = reduced_stroke(family, n_training, &settings)?;
    let (frame_errors, l2_error) = longitudinal_error(&p_dot, reference);
    let trajectory = integrate_rigid_motion(&p_dot, family.params.dt())?;
    Ok(StrokeReconstruction { training_frames: training, trajectory, frame_errors, l2_error })
}
