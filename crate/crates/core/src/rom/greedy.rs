//! Greedy snapshot selection.
//!
//! The velocity basis grows by the candidate with the largest relative
//! projection error. Traction bases grow by the candidate with the largest
//! residual `‖K̃ U_u u_N − Ṽ U_f f_N‖ / ‖K̃ U_u u_N‖` of the current reduced
//! model, where `Ṽ` and `K̃` are the interpolated operators. Full-order
//! solves happen only at selected candidates.

use std::collections::BTreeMap;

use faer::Mat;

use crate::bem::SolveMode;
use crate::error::{Error, Result};
use crate::linalg::{column, mat_t_vec, mat_vec, norm, Lu};
use crate::mesh::rigid::RigidKit;
use crate::rom::mdeim::{unvectorize, AffineExpansion};
use crate::rom::pod::gram_schmidt_append;
use crate::rom::snapshot::FullOrder;
use crate::swimmer::SwimmerFamily;

/// Iterations without a decrease after which stagnation is reported.
pub const STAGNATION_WINDOW: usize = 5;

const DEPENDENCE_TOL: f64 = 1e-10;
const CHUNK: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct GreedySettings {
    pub mode: SolveMode,
    pub velocity_tolerance: f64,
    pub max_velocity_modes: usize,
    /// Stop once the largest residual falls below this.
    pub tolerance: f64,
    /// Traction modes per system.
    pub max_modes: usize,
}

impl Default for GreedySettings {
    fn default() -> Self {
        Self { mode: SolveMode::Split, velocity_tolerance: 1e-6, max_velocity_modes: usize::MAX, tolerance: 1e-4, max_modes: 60 }
    }
}

/// History of one growing traction basis.
#[derive(Clone, Debug, Default)]
pub struct GreedyTrace {
    /// Selected candidate per iteration.
    pub selected: Vec<usize>,
    /// Largest indicator over the candidates before each selection.
    pub indicators: Vec<f64>,
    pub stagnated: bool,
}

#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub velocity_selected: Vec<usize>,
    pub velocity_indicators: Vec<f64>,
    /// One trace per traction system.
    pub traces: Vec<GreedyTrace>,
    pub uu: Mat<f64>,
    pub ufs: Vec<Mat<f64>>,
    /// Candidates at which a full-order solve was run.
    pub solved: Vec<usize>,
}

struct Candidate {
    velocities: Mat<f64>,
    ptm: Mat<f64>,
    theta_v: Vec<f64>,
    theta_k: Vec<f64>,
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn stagnating(history: &[f64]) -> bool {
    if history.len() <= STAGNATION_WINDOW {
        return false;
    }
    let recent = &history[history.len() - STAGNATION_WINDOW - 1..];
    recent.windows(2).all(|w| w[1] >= w[0])
}

fn append_column(m: &mut Mat<f64>, v: &[f64]) {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = Mat::zeros(r, c + 1);
    out.as_mut().subcols_mut(0, c).copy_from(m.as_ref());
    out.col_as_slice_mut(c).copy_from_slice(v);
    *m = out;
}

/// `Σ_i θ_i (A_i q)` for every candidate, from the per-term products.
fn combine(per_term: &[Mat<f64>], theta: &[f64]) -> Mat<f64> {
    let mut out = Mat::zeros(per_term[0].nrows(), per_term[0].ncols());
    for (a, &t) in per_term.iter().zip(theta) {
        for j in 0..a.ncols() {
            for (o, x) in out.col_as_slice_mut(j).iter_mut().zip(a.col_as_slice(j)) {
                *o += t * x;
            }
        }
    }
    out
}

/// Selects snapshots greedily over `candidates` and returns the bases.
pub fn greedy_sample(
    family: &dyn SwimmerFamily,
    candidates: &[Vec<f64>],
    v_exp: &AffineExpansion,
    k_exp: &AffineExpansion,
    settings: &GreedySettings,
) -> Result<GreedyOutcome> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("empty candidate set".into()));
    }
    let n = family.dof_count();
    let k_basis = k_exp
        .basis
        .as_ref()
        .ok_or_else(|| Error::Incompatible("greedy sampling needs the expansion basis".into()))?;

    let cands: Vec<Candidate> = candidates
        .iter()
        .map(|mu| {
            let s = family.build(mu)?;
            let kit = RigidKit::new(&s.mesh, s.x0);
            let mut velocities = Mat::zeros(n, 7);
            velocities.as_mut().subcols_mut(0, 6).copy_from(kit.p.as_ref());
            velocities.col_as_slice_mut(6).copy_from_slice(&s.shape_velocity);
            Ok(Candidate { velocities, ptm: kit.ptm, theta_v: v_exp.online(&s.mesh)?, theta_k: k_exp.online(&s.mesh)? })
        })
        .collect::<Result<_>>()?;

    // velocity basis: residuals are deflated as columns are added
    let mut residuals: Vec<Mat<f64>> = cands.iter().map(|c| c.velocities.clone()).collect();
    let norms: Vec<f64> = cands.iter().map(|c| c.velocities.norm_l2()).collect();
    let mut uu = Mat::<f64>::zeros(n, 0);
    let mut velocity_selected = Vec::new();
    let mut velocity_indicators = Vec::new();
    while uu.ncols() < settings.max_velocity_modes {
        let errs: Vec<f64> = residuals.iter().zip(&norms).map(|(r, &nv)| r.norm_l2() / nv).collect();
        let (best, err) = argmax(&errs);
        velocity_indicators.push(err);
        if err < settings.velocity_tolerance {
            break;
        }
        let before = uu.ncols();
        for j in 0..7 {
            if uu.ncols() < settings.max_velocity_modes {
                gram_schmidt_append(&mut uu, cands[best].velocities.col_as_slice(j), DEPENDENCE_TOL);
            }
        }
        if uu.ncols() == before {
            break;
        }
        velocity_selected.push(best);
        let added = uu.as_ref().subcols(before, uu.ncols() - before);
        for r in residuals.iter_mut() {
            let c = added.transpose() * &*r;
            *r -= added * &c;
        }
    }
    drop(residuals);

    // right-hand sides K̃ U_u U_u^T [P | v] per candidate
    let mut rhs: Vec<Mat<f64>> = Vec::with_capacity(cands.len());
    for chunk in cands.chunks(CHUNK) {
        let theta = Mat::from_fn(k_exp.terms(), chunk.len(), |i, c| chunk[c].theta_k[i]);
        let k_flat = k_basis * &theta;
        for (c, cand) in chunk.iter().enumerate() {
            let kt = unvectorize(k_flat.col_as_slice(c), n);
            let proj = &uu * (uu.transpose() * &cand.velocities);
            rhs.push(kt * &proj);
        }
    }

    let systems = match settings.mode {
        SolveMode::Split => 7,
        SolveMode::Monolithic => 1,
    };
    let mut ufs: Vec<Mat<f64>> = (0..systems).map(|_| Mat::zeros(n, 0)).collect();
    // Ṽ_c U_f per candidate and system
    let mut z: Vec<Vec<Mat<f64>>> = (0..systems).map(|_| (0..cands.len()).map(|_| Mat::zeros(n, 0)).collect()).collect();
    let mut traces: Vec<GreedyTrace> = vec![GreedyTrace::default(); systems];
    let mut active = vec![true; systems];
    let mut tractions: BTreeMap<usize, Mat<f64>> = BTreeMap::new();

    while active.iter().any(|&a| a) {
        let mut new_columns: Vec<(usize, Vec<f64>)> = Vec::new();
        for s in 0..systems {
            if !active[s] {
                continue;
            }
            if ufs[s].ncols() >= settings.max_modes {
                active[s] = false;
                continue;
            }
            let ind: Vec<f64> = (0..cands.len())
                .map(|c| indicator(settings.mode, s, &ufs[s], &z[s][c], &rhs[c], &cands[c]))
                .collect::<Result<_>>()?;
            let (best, val) = argmax(&ind);
            traces[s].indicators.push(val);
            traces[s].stagnated |= stagnating(&traces[s].indicators);
            if val < settings.tolerance {
                active[s] = false;
                continue;
            }
            if !tractions.contains_key(&best) {
                let fo = FullOrder::solve(family, &candidates[best])
                    .map_err(|e| e.in_phase(format!("greedy solve at {:?}", candidates[best])))?;
                tractions.insert(best, fo.snapshot(&candidates[best]).tractions);
            }
            let t = &tractions[&best];
            let cols: Vec<usize> = if settings.mode == SolveMode::Split { vec![s] } else { (0..7).collect() };
            let before = ufs[s].ncols();
            for j in cols {
                if ufs[s].ncols() < settings.max_modes {
                    gram_schmidt_append(&mut ufs[s], t.col_as_slice(j), DEPENDENCE_TOL);
                }
            }
            if ufs[s].ncols() == before {
                active[s] = false;
                continue;
            }
            traces[s].selected.push(best);
            for k in before..ufs[s].ncols() {
                new_columns.push((s, ufs[s].col_as_slice(k).to_vec()));
            }
        }
        if new_columns.is_empty() {
            continue;
        }
        // extend Ṽ_c U_f with the new columns
        let q = Mat::from_fn(n, new_columns.len(), |i, j| new_columns[j].1[i]);
        let per_term = v_exp.project(|a| a * &q)?;
        for (c, cand) in cands.iter().enumerate() {
            let vq = combine(&per_term, &cand.theta_v);
            for (j, (s, _)) in new_columns.iter().enumerate() {
                append_column(&mut z[*s][c], vq.col_as_slice(j));
            }
        }
    }

    let solved = tractions.keys().copied().collect();
    Ok(GreedyOutcome { velocity_selected, velocity_indicators, traces, uu, ufs, solved })
}

/// Relative residual of the current reduced model at one candidate.
fn indicator(
    mode: SolveMode,
    system: usize,
    uf: &Mat<f64>,
    z: &Mat<f64>,
    rhs: &Mat<f64>,
    cand: &Candidate,
) -> Result<f64> {
    let m = uf.ncols();
    match mode {
        SolveMode::Split => {
            let y = rhs.col_as_slice(system);
            let ny = norm(y);
            if ny == 0.0 {
                return Ok(0.0);
            }
            if m == 0 {
                return Ok(1.0);
            }
            let vn = uf.transpose() * z;
            let lu = match Lu::new(vn.as_ref(), "greedy reduced system") {
                Err(Error::Singular { .. }) => return Ok(1.0),
                lu => lu?,
            };
            let fnv = lu.solve_vec(&mat_t_vec(uf.as_ref(), y));
            let zf = mat_vec(z.as_ref(), &fnv);
            let r: Vec<f64> = y.iter().zip(&zf).map(|(a, b)| a - b).collect();
            Ok(norm(&r) / ny)
        }
        SolveMode::Monolithic => {
            let yp = rhs.as_ref().subcols(0, 6);
            let yv = rhs.col_as_slice(6);
            if m == 0 {
                return Ok(1.0);
            }
            let vn = uf.transpose() * z;
            let kp = uf.transpose() * yp;
            let ptm_uf = &cand.ptm * uf;
            let mut a = Mat::zeros(m + 6, m + 6);
            a.as_mut().submatrix_mut(0, 0, m, m).copy_from(&vn);
            for k in 0..6 {
                for i in 0..m {
                    a[(i, m + k)] = -kp[(i, k)];
                    a[(m + k, i)] = ptm_uf[(k, i)];
                }
            }
            let mut b = mat_t_vec(uf.as_ref(), yv);
            b.extend_from_slice(&[0.0; 6]);
            // a basis too small to resolve the rigid constraints counts as unresolved
            let lu = match Lu::new(a.as_ref(), "greedy reduced saddle system") {
                Err(Error::Singular { .. }) => return Ok(1.0),
                lu => lu?,
            };
            let x = lu.solve(column(&b).as_ref());
            let x = x.col_as_slice(0);
            let pdot = &x[m..];
            let u = mat_vec(yp, pdot);
            let total: Vec<f64> = u.iter().zip(yv).map(|(a, b)| a + b).collect();
            let zf = mat_vec(z.as_ref(), &x[..m]);
            let r: Vec<f64> = total.iter().zip(&zf).map(|(a, b)| a - b).collect();
            let nt = norm(&total);
            Ok(if nt > 0.0 { norm(&r) / nt } else { 0.0 })
        }
    }
}

/// Groups selected indices on a periodic axis of length `period`: a new
/// cluster starts wherever consecutive selections are more than `gap` apart.
pub fn periodic_clusters(selected: &[usize], period: usize, gap: usize) -> Vec<Vec<usize>> {
    let mut s: Vec<usize> = selected.iter().map(|&x| x % period).collect();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() {
        return vec![];
    }
    let k = s.len();
    // start after the widest gap so no cluster straddles the cut
    let mut start = 0;
    let mut widest = 0;
    for i in 0..k {
        let next = s[(i + 1) % k] + if i + 1 == k { period } else { 0 };
        if next - s[i] > widest {
            widest = next - s[i];
            start = (i + 1) % k;
        }
    }
    let mut clusters: Vec<Vec<usize>> = vec![vec![s[start]]];
    for step in 1..k {
        let prev = s[(start + step - 1) % k];
        let cur = s[(start + step) % k];
        let d = (cur + period - prev) % period;
        if d > gap {
            clusters.push(vec![cur]);
        } else {
            clusters.last_mut().expect("nonempty").push(cur);
        }
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_split_on_gaps_and_wrap() {
        let c = periodic_clusters(&[1, 2, 3, 50, 52, 239], 240, 10);
        assert_eq!(c.len(), 2);
        assert!(c.iter().any(|g| g.contains(&239) && g.contains(&1)));
        assert_eq!(periodic_clusters(&[5], 240, 10).len(), 1);
        assert!(periodic_clusters(&[], 240, 10).is_empty());
    }

    #[test]
    fn stagnation_needs_a_full_window() {
        assert!(!stagnating(&[1.0, 0.5, 0.5, 0.5, 0.5, 0.5]));
        assert!(stagnating(&[1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.6]));
        assert!(!stagnating(&[1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4]));
    }
}
