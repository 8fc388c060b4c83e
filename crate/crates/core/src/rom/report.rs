//! Held-out error measurement of reduced models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bem::{BemOperators, SwimSolution};
use crate::error::{Error, Result};
use crate::linalg::relative_error;
use crate::mesh::rigid::RigidKit;
use crate::rom::model::{OnlineOperators, RomModel};
use crate::rom::snapshot::{FullOrder, Snapshot};
use crate::swimmer::{Swimmer, SwimmerFamily};

/// Number of held-out parameters used by default.
pub const HELD_OUT_COUNT: usize = 10;

/// A full-order reference solution kept for error measurement.
pub struct HeldOut {
    pub mu: Vec<f64>,
    pub swimmer: Swimmer,
    pub kit: RigidKit,
    pub reference: Snapshot,
    /// Full operators, kept when exact-operator solves are wanted.
    pub ops: Option<BemOperators>,
}

pub fn held_out_set(family: &dyn SwimmerFamily, params: &[Vec<f64>], keep_ops: bool) -> Result<Vec<HeldOut>> {
    params
        .iter()
        .map(|mu| {
            let fo = FullOrder::solve(family, mu).map_err(|e| e.in_phase(format!("reference solve at {mu:?}")))?;
            let reference = fo.snapshot(mu);
            Ok(HeldOut {
                mu: mu.clone(),
                reference,
                ops: keep_ops.then_some(fo.ops),
                swimmer: fo.swimmer,
                kit: fo.kit,
            })
        })
        .collect()
}

/// Relative traction error of a reduced solution: the shape traction in
/// split mode, the total traction in monolithic mode.
pub fn traction_error(sol: &SwimSolution, reference: &Snapshot) -> f64 {
    match &sol.f_shape {
        Some(fs) => relative_error(fs, reference.f_shape()),
        None => relative_error(&sol.f, &reference.traction),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorStats {
    pub modes: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl ErrorStats {
    pub fn from_errors(modes: usize, errors: &[f64]) -> Self {
        let min = errors.iter().copied().fold(f64::INFINITY, f64::min);
        let max = errors.iter().copied().fold(0.0, f64::max);
        let mean = errors.iter().sum::<f64>() / errors.len().max(1) as f64;
        Self { modes, min, mean, max }
    }
}

/// Operators used when measuring errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorChoice {
    Interpolated,
    Exact,
}

/// Error statistics over `held` for each traction mode count.
pub fn rom_error_report(
    rom: &RomModel,
    held: &[HeldOut],
    mode_counts: &[usize],
    operators: OperatorChoice,
) -> Result<Vec<ErrorStats>> {
    if held.is_empty() {
        return Err(Error::InvalidParameter("no held-out parameters".into()));
    }
    let online: Vec<OnlineOperators<'_>> = held
        .iter()
        .map(|h| match operators {
            OperatorChoice::Interpolated => rom.interpolate(&h.swimmer),
            OperatorChoice::Exact => h
                .ops
                .as_ref()
                .map(OnlineOperators::Exact)
                .ok_or_else(|| Error::Incompatible("held-out set kept no operators".into())),
        })
        .collect::<Result<_>>()?;
    mode_counts
        .iter()
        .map(|&n| {
            let r = rom.truncated(n);
            let errors = held
                .iter()
                .zip(&online)
                .map(|(h, ops)| {
                    r.solve_with(&h.kit, &h.swimmer.shape_velocity, ops)
                        .map(|sol| traction_error(&sol, &h.reference))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ErrorStats::from_errors(n, &errors))
        })
        .collect()
}

/// Uniform random parameters in a box, avoiding exact training values.
/// Fewer than `count` come back when the box cannot supply distinct ones.
pub fn random_parameters(domain: &[(f64, f64)], count: usize, seed: u64, exclude: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..1000 * (count + 1) {
        if out.len() == count {
            break;
        }
        let mu: Vec<f64> = domain.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
        if !exclude.contains(&mu) && !out.contains(&mu) {
            out.push(mu);
        }
    }
    out
}

/// Distinct random frames in `0..frames` outside `exclude`.
pub fn random_frames(frames: usize, count: usize, seed: u64, exclude: &[usize]) -> Result<Vec<usize>> {
    let free = frames.saturating_sub(exclude.iter().filter(|&&f| f < frames).count());
    if count > free {
        return Err(Error::InvalidParameter(format!("cannot draw {count} held-out frames from {free} free ones")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let f = rng.gen_range(0..frames);
        if !exclude.contains(&f) && !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_parameters_are_seeded_and_inside() {
        let a = random_parameters(&[(0.4, 4.0), (0.4, 4.0)], 10, 7, &[]);
        let b = random_parameters(&[(0.4, 4.0), (0.4, 4.0)], 10, 7, &[]);
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|&x| (0.4..=4.0).contains(&x)));
        assert_ne!(a, random_parameters(&[(0.4, 4.0), (0.4, 4.0)], 10, 8, &[]));
    }

    #[test]
    fn random_frames_skip_training() {
        let train: Vec<usize> = (0..240).step_by(2).collect();
        let f = random_frames(240, 10, 1, &train).unwrap();
        assert!(f.iter().all(|x| x % 2 == 1));
        assert!(random_frames(4, 3, 1, &[0, 1]).is_err());
    }

    #[test]
    fn stats_summarize() {
        let s = ErrorStats::from_errors(3, &[0.1, 0.3, 0.2]);
        assert_eq!((s.min, s.max), (0.1, 0.3));
        assert!((s.mean - 0.2).abs() < 1e-15);
    }
}
