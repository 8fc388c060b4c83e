//! Two-step grid optimization of the bacterium's efficiency.
//!
//! A reduced model trained over the whole parameter box drives a coarse grid
//! search. A second model, trained on a focus box one coarse step around the
//! coarse optimum, drives a finer search. The final optimum is checked with
//! a full-order solve.

use crate::analysis::additive::additive_approach;
use crate::analysis::efficiency::{efficiency_record, EfficiencyRecord, Provenance};
use crate::bem::drag_coefficient_head;
use crate::error::{Error, Result};
use crate::mesh::bacterium::{BacteriumFamily, PARAM_RANGE};
use crate::mesh::rigid::RigidKit;
use crate::rom::model::{build_expansions, build_pod_rom, RomModel, RomSettings};
use crate::rom::snapshot::{collect_snapshots, grid, linspace, FullOrder};
use crate::swimmer::SwimmerFamily;

/// Evenly stepped values from `lo` to `hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo <= hi) || !(step > 0.0) {
            return Err(Error::InvalidParameter(format!("axis [{lo}, {hi}] with step {step}")));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn count(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count();
        (0..n).map(|i| round12(self.lo + self.step * i as f64)).collect()
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Grid over `(n_lambda, r_head)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n_lambda: Axis,
    pub r_head: Axis,
}

impl GridSpec {
    /// The whole parameter box at step 0.2 in both directions.
    pub fn coarse_default() -> Self {
        let (lo, hi) = PARAM_RANGE;
        let a = Axis { lo, hi, step: 0.2 };
        Self { n_lambda: a, r_head: a }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        grid(&[self.n_lambda.values(), self.r_head.values()])
    }

    pub fn len(&self) -> usize {
        self.n_lambda.count() * self.r_head.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Box one coarse step around `best`, clamped to the coarse grid, with the
/// given fine steps. The flag reports a clamped (boundary) optimum.
pub fn focus_box(coarse: &GridSpec, best: [f64; 2], fine_step: [f64; 2]) -> Result<(GridSpec, bool)> {
    let mut clamped = false;
    let mut make = |c: f64, axis: &Axis, fine: f64| {
        let hi = axis.values().last().copied().unwrap_or(axis.lo);
        let (a, b) = (c - axis.step, c + axis.step);
        clamped |= a < axis.lo - 1e-12 || b > hi + 1e-12;
        Axis::new(round12(a.max(axis.lo)), round12(b.min(hi)), fine)
    };
    let n = make(best[0], &coarse.n_lambda, fine_step[0])?;
    let r = make(best[1], &coarse.r_head, fine_step[1])?;
    Ok((GridSpec { n_lambda: n, r_head: r }, clamped))
}

/// Efficiency evaluations at one resolution.
pub struct EfficiencyModel {
    pub family: BacteriumFamily,
    /// Head drag coefficient per unit radius.
    pub drag_per_radius: f64,
}

impl EfficiencyModel {
    pub fn new(family: BacteriumFamily) -> Result<Self> {
        let drag_per_radius = drag_coefficient_head(1.0, &family.resolution)?;
        Ok(Self { family, drag_per_radius })
    }

    pub fn full_order(&self, mu: &[f64]) -> Result<EfficiencyRecord> {
        let fo = FullOrder::solve(&self.family, mu)?;
        efficiency_record(&fo.swimmer, &fo.kit, &fo.solution, mu[0], mu[1], self.drag_per_radius * mu[1], Provenance::Fom)
    }

    pub fn reduced(&self, rom: &RomModel, mu: &[f64]) -> Result<EfficiencyRecord> {
        let s = self.family.build(mu)?;
        let sol = rom.solve(&s)?;
        let kit = RigidKit::new(&s.mesh, s.x0);
        efficiency_record(&s, &kit, &sol, mu[0], mu[1], self.drag_per_radius * mu[1], Provenance::Rom)
    }

    pub fn additive(&self, mu: &[f64]) -> Result<EfficiencyRecord> {
        let s = self.family.build(mu)?;
        additive_approach(&s, mu[0], mu[1], self.drag_per_radius * mu[1])
    }
}

#[derive(Clone, Debug)]
pub struct GridSearch {
    pub records: Vec<EfficiencyRecord>,
    pub best: EfficiencyRecord,
}

/// Evaluates every point and keeps the first maximum of the efficiency.
pub fn grid_search(points: &[Vec<f64>], mut eval: impl FnMut(&[f64]) -> Result<EfficiencyRecord>) -> Result<GridSearch> {
    let mut records = Vec::with_capacity(points.len());
    for mu in points {
        records.push(eval(mu).map_err(|e| e.in_phase(format!("efficiency at {mu:?}")))?);
    }
    let best = *records
        .iter()
        .reduce(|a, b| if b.eta > a.eta { b } else { a })
        .ok_or_else(|| Error::InvalidParameter("empty search grid".into()))?;
    Ok(GridSearch { records, best })
}

/// Trains a reduced model on a tensor grid over `bounds`.
pub fn train_bacterium_rom(
    family: &BacteriumFamily,
    bounds: [(f64, f64); 2],
    counts: [usize; 2],
    settings: &RomSettings,
) -> Result<RomModel> {
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .zip(counts)
        .map(|(&(lo, hi), n)| if hi > lo { linspace(lo, hi, n.max(2)) } else { vec![lo] })
        .collect();
    let params = grid(&axes);
    let mut set = collect_snapshots(family, &params, true)?;
    let (v, k) = build_expansions(&mut set, settings)?;
    build_pod_rom(&set, settings, &v, &k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Coarse,
    Fine,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Coarse => "coarse",
            Stage::Fine => "fine",
        }
    }
}

/// Optimum found by one method at one stage.
#[derive(Clone, Copy, Debug)]
pub struct ComparisonRow {
    pub stage: Stage,
    pub best: EfficiencyRecord,
    /// `|eta - eta_fom| / eta_fom` against the full-order optimum of the same
    /// stage, when that was computed.
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct OptimizeSettings {
    pub coarse: GridSpec,
    pub fine_step: [f64; 2],
    /// Training grid sizes over the whole box and over the focus box.
    pub coarse_training: [usize; 2],
    pub focus_training: [usize; 2],
    pub rom: RomSettings,
    pub compare_full_order: bool,
    pub compare_additive: bool,
}

#[derive(Clone, Debug)]
pub struct OptimizationReport {
    pub coarse: GridSearch,
    pub focus: GridSpec,
    pub fine: GridSearch,
    /// Full-order solve at the reduced fine optimum.
    pub verified: EfficiencyRecord,
    pub coarse_full_order: Option<GridSearch>,
    pub fine_full_order: Option<GridSearch>,
    pub coarse_additive: Option<GridSearch>,
    pub fine_additive: Option<GridSearch>,
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Runs both search stages. `coarse_rom` may be supplied to skip step-one
/// training; `build` trains a model for a bounding box.
pub fn two_step_optimize(
    model: &EfficiencyModel,
    settings: &OptimizeSettings,
    coarse_rom: Option<&RomModel>,
    mut build: impl FnMut([(f64, f64); 2], [usize; 2]) -> Result<RomModel>,
) -> Result<OptimizationReport> {
    let mut warnings = Vec::new();
    let trained;
    let rom1 = match coarse_rom {
        Some(r) => r,
        None => {
            let c = &settings.coarse;
            trained = build([(c.n_lambda.lo, c.n_lambda.hi), (c.r_head.lo, c.r_head.hi)], settings.coarse_training)
                .map_err(|e| e.in_phase("coarse training"))?;
            &trained
        }
    };
    let coarse_points = settings.coarse.points();
    let coarse = grid_search(&coarse_points, |mu| model.reduced(rom1, mu))?;
    let (focus, clamped) = focus_box(&settings.coarse, [coarse.best.n_lambda, coarse.best.r_head], settings.fine_step)?;
    if clamped {
        warnings.push(format!(
            "coarse optimum ({}, {}) lies on the parameter boundary; focus box clamped",
            coarse.best.n_lambda, coarse.best.r_head
        ));
    }
    let fine_points = focus.points();
    let fine = if fine_points.len() == 1 {
        let r = model.full_order(&fine_points[0])?;
        GridSearch { records: vec![r], best: r }
    } else {
        let rom2 = build(
            [(focus.n_lambda.lo, focus.n_lambda.hi), (focus.r_head.lo, focus.r_head.hi)],
            settings.focus_training,
        )
        .map_err(|e| e.in_phase("focus training"))?;
        grid_search(&fine_points, |mu| model.reduced(&rom2, mu))?
    };
    let verified = model.full_order(&[fine.best.n_lambda, fine.best.r_head])?;

    let (mut coarse_fom, mut fine_fom, mut coarse_aa, mut fine_aa) = (None, None, None, None);
    if settings.compare_full_order {
        coarse_fom = Some(grid_search(&coarse_points, |mu| model.full_order(mu))?);
        fine_fom = Some(grid_search(&fine_points, |mu| model.full_order(mu))?);
    }
    if settings.compare_additive {
        coarse_aa = Some(grid_search(&coarse_points, |mu| model.additive(mu))?);
        fine_aa = Some(grid_search(&fine_points, |mu| model.additive(mu))?);
    }
    let reference = |g: &Option<GridSearch>| g.as_ref().map(|g| g.best.eta);
    let mut rows = Vec::new();
    for (stage, fom, searches) in [
        (Stage::Coarse, reference(&coarse_fom), [coarse_fom.as_ref(), Some(&coarse), coarse_aa.as_ref()]),
        (Stage::Fine, reference(&fine_fom), [fine_fom.as_ref(), Some(&fine), fine_aa.as_ref()]),
    ] {
        for g in searches.into_iter().flatten() {
            rows.push(ComparisonRow { stage, best: g.best, relative_error: fom.map(|f| rel(g.best.eta, f)) });
        }
    }
    Ok(OptimizationReport {
        coarse,
        focus,
        fine,
        verified,
        coarse_full_order: coarse_fom,
        fine_full_order: fine_fom,
        coarse_additive: coarse_aa,
        fine_additive: fine_aa,
        rows,
        warnings,
    })
}

/// Index of the grid cell containing `x` on an axis.
pub fn cell_index(axis: &Axis, x: f64) -> usize {
    (((x - axis.lo) / axis.step) + 1e-9).floor().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_grid_has_19_by_19_points() {
        let g = GridSpec::coarse_default();
        assert_eq!(g.n_lambda.count(), 19);
        assert_eq!(g.len(), 361);
        let v = g.r_head.values();
        assert_eq!(v[0], 0.4);
        assert_eq!(v[18], 4.0);
        assert_eq!(v[3], 1.0);
    }

    #[test]
    fn focus_box_is_clamped_at_the_boundary() {
        let g = GridSpec::coarse_default();
        let (b, clamped) = focus_box(&g, [4.0, 0.4], [0.02, 0.02]).unwrap();
        assert!(clamped);
        assert_eq!((b.n_lambda.lo, b.n_lambda.hi), (3.8, 4.0));
        assert_eq!((b.r_head.lo, b.r_head.hi), (0.4, 0.6));
        assert_eq!(b.n_lambda.count(), 11);
        let (b, clamped) = focus_box(&g, [2.4, 0.8], [0.02, 0.02]).unwrap();
        assert!(!clamped);
        assert_eq!((b.r_head.lo, b.r_head.hi), (0.6, 1.0));
    }

    #[test]
    fn single_point_axis() {
        let a = Axis::new(1.0, 1.0, 0.1).unwrap();
        assert_eq!(a.values(), vec![1.0]);
        assert!(Axis::new(2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn grid_search_keeps_first_maximum() {
        let pts = vec![vec![1.0, 1.0], vec![2.0, 1.0], vec![3.0, 1.0]];
        let rec = |n: f64, eta: f64| EfficiencyRecord {
            n_lambda: n,
            r_head: 1.0,
            u_axial: 0.0,
            t_motor: 1.0,
            k_head: 1.0,
            eta,
            provenance: Provenance::Fom,
        };
        let g = grid_search(&pts, |mu| Ok(rec(mu[0], if mu[0] > 1.5 { 0.5 } else { 0.1 }))).unwrap();
        assert_eq!(g.best.n_lambda, 2.0);
    }

    #[test]
    fn cells_are_indexed_from_the_lower_bound() {
        let a = Axis { lo: 0.4, hi: 4.0, step: 0.2 };
        assert_eq!(cell_index(&a, 0.4), 0);
        assert_eq!(cell_index(&a, 0.8), 2);
        assert_eq!(cell_index(&a, 0.79), 1);
    }
}
