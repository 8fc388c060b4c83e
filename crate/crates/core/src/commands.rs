//! End-to-end pipelines behind the command-line subcommands.
//!
//! Every pipeline writes into the configured output directory and finishes
//! with a run manifest listing the files it produced. Tables never hold
//! timings, so reruns with the same configuration and seed give identical
//! CSV files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::efficiency::{efficiency_record, Provenance};
use crate::analysis::optimize::{
    train_bacterium_rom, two_step_optimize, Axis, EfficiencyModel, GridSearch, GridSpec, OptimizationReport,
    OptimizeSettings,
};
use crate::analysis::stroke::{full_order_stroke, integrate_rigid_motion, longitudinal_error, reduced_stroke, training_frames};
use crate::bem::{drag_coefficient_head, SwimSolution};
use crate::bem::validation::{validate as run_checks, Check, ValidationOptions};
use crate::error::{Error, Result};
use crate::io::config::{BasisMethod, ExperimentConfig, ResolutionPreset, SwimmerKind};
use crate::io::manifest::RunManifest;
use crate::io::store::{load_model, save_model, save_snapshots, ModelIdentity};
use crate::io::table::{num, Table};
use crate::io::vtk::{magnitudes, write_vtk};
use crate::linalg::relative_error;
use crate::mesh::bacterium::BacteriumFamily;
use crate::mesh::rigid::RigidKit;
use crate::mesh::stroke::{StrokeFamily, StrokeParams};
use crate::rom::greedy::greedy_sample;
use crate::rom::model::{build_expansions, build_pod_rom, RomModel};
use crate::rom::report::{held_out_set, random_frames, random_parameters, rom_error_report, traction_error, OperatorChoice};
use crate::rom::snapshot::{collect_snapshots, grid, linspace, FullOrder};
use crate::swimmer::SwimmerFamily;

/// Whether reduced results are checked against full-order solves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Verify {
    #[default]
    Fom,
    None,
}

impl std::str::FromStr for Verify {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fom" => Ok(Verify::Fom),
            "none" => Ok(Verify::None),
            other => Err(Error::Config(format!("unknown verification '{other}'"))),
        }
    }
}

/// Subdirectory of the output directory that holds the trained model.
pub const MODEL_SUBDIR: &str = "rom";

pub fn bacterium_family(cfg: &ExperimentConfig) -> BacteriumFamily {
    BacteriumFamily::new(cfg.resolution.bacterium())
}

pub fn stroke_family(cfg: &ExperimentConfig) -> StrokeFamily {
    StrokeFamily { params: StrokeParams::with_frames(cfg.stroke.frames), resolution: cfg.resolution.eukaryote() }
}

pub fn family(cfg: &ExperimentConfig) -> Box<dyn SwimmerFamily> {
    match cfg.swimmer {
        SwimmerKind::Bacterium => Box::new(bacterium_family(cfg)),
        SwimmerKind::Eukaryote => Box::new(stroke_family(cfg)),
    }
}

fn axis(range: [f64; 2], count: usize) -> Vec<f64> {
    if count == 1 || range[0] == range[1] {
        vec![0.5 * (range[0] + range[1])]
    } else {
        linspace(range[0], range[1], count)
    }
}

pub fn training_params(cfg: &ExperimentConfig) -> Result<Vec<Vec<f64>>> {
    match cfg.swimmer {
        SwimmerKind::Bacterium => Ok(grid(&[
            axis(cfg.domain.n_lambda, cfg.training.n_lambda),
            axis(cfg.domain.r_head, cfg.training.r_head),
        ])),
        SwimmerKind::Eukaryote => Ok(training_frames(cfg.stroke.frames, cfg.training.frames)?
            .into_iter()
            .map(|f| vec![f as f64])
            .collect()),
    }
}

/// Explicit queries followed by the seeded random held-out ones.
pub fn query_params(cfg: &ExperimentConfig) -> Result<Vec<Vec<f64>>> {
    let training = training_params(cfg)?;
    let mut out = cfg.online.queries.clone();
    match cfg.swimmer {
        SwimmerKind::Bacterium => {
            let d = [
                (cfg.domain.n_lambda[0], cfg.domain.n_lambda[1]),
                (cfg.domain.r_head[0], cfg.domain.r_head[1]),
            ];
            out.extend(random_parameters(&d, cfg.online.random, cfg.seed, &training));
        }
        SwimmerKind::Eukaryote => {
            let exclude: Vec<usize> = training.iter().map(|mu| mu[0] as usize).collect();
            let frames = random_frames(cfg.stroke.frames, cfg.online.random, cfg.seed, &exclude)?;
            out.extend(frames.into_iter().map(|f| vec![f as f64]));
        }
    }
    Ok(out)
}

pub fn identity(cfg: &ExperimentConfig) -> ModelIdentity {
    ModelIdentity { swimmer: cfg.swimmer, resolution: cfg.resolution, model_hash: cfg.model_hash() }
}

pub fn model_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.online.model.clone().unwrap_or_else(|| cfg.out.join(MODEL_SUBDIR))
}

/// Loads the configured model and refuses one trained for other settings.
pub fn load_compatible_model(cfg: &ExperimentConfig) -> Result<RomModel> {
    let dir = model_dir(cfg);
    let (rom, manifest) = load_model(&dir).map_err(|e| e.in_phase(format!("loading {}", dir.display())))?;
    if manifest.identity != identity(cfg) {
        return Err(Error::Incompatible(format!(
            "model in {} was trained for {} at {} resolution with hash {}, the configuration needs {}",
            dir.display(),
            manifest.identity.swimmer.name(),
            manifest.identity.resolution.name(),
            manifest.identity.model_hash,
            cfg.model_hash()
        )));
    }
    Ok(rom)
}

fn param_header(kind: SwimmerKind) -> Vec<&'static str> {
    match kind {
        SwimmerKind::Bacterium => vec!["n_lambda", "r_head"],
        SwimmerKind::Eukaryote => vec!["frame"],
    }
}

fn param_cells(mu: &[f64]) -> Vec<String> {
    mu.iter().map(|&x| num(x)).collect()
}

const P_DOT_HEADER: [&str; 6] = ["u_x", "u_y", "u_z", "omega_x", "omega_y", "omega_z"];

pub struct ValidationOutcome {
    pub checks: Vec<Check>,
    pub manifest: Option<RunManifest>,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Sphere drag and torque against their analytic values, and agreement of
/// the two solve formulations.
pub fn validate(opts: &ValidationOptions, out: Option<&Path>) -> Result<ValidationOutcome> {
    let mut manifest = RunManifest::new("validate", "", 0);
    let checks = manifest.time("validation", || run_checks(opts))?;
    let manifest = match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut t = Table::new(&["check", "value", "reference", "error", "tolerance", "passed", "failure"]);
            for c in &checks {
                t.push(vec![
                    c.name.into(),
                    num(c.value),
                    num(c.reference),
                    num(c.error),
                    num(c.tolerance),
                    c.passed().to_string(),
                    c.failure.clone().unwrap_or_default(),
                ])?;
            }
            t.write(&dir.join("validation.csv"))?;
            manifest.finish(dir)?;
            Some(manifest)
        }
        None => None,
    };
    Ok(ValidationOutcome { checks, manifest })
}

pub fn validation_options(resolution: ResolutionPreset) -> ValidationOptions {
    ValidationOptions::for_resolution(resolution)
}

pub struct OfflineOutcome {
    pub rom: RomModel,
    pub snapshot_count: usize,
    pub manifest: RunManifest,
}

/// Snapshots, operator interpolation and reduced bases; the model and the
/// snapshot solutions are stored under `rom/`.
pub fn offline(cfg: &ExperimentConfig) -> Result<OfflineOutcome> {
    cfg.validate()?;
    let out = &cfg.out;
    let rom_dir = out.join(MODEL_SUBDIR);
    std::fs::create_dir_all(&rom_dir)?;
    let mut manifest = RunManifest::new("offline", &cfg.config_hash(), cfg.seed);
    let fam = family(cfg);
    let params = training_params(cfg)?;
    let settings = cfg.rom_settings();

    let mut set = manifest.time("offline assembly", || collect_snapshots(fam.as_ref(), &params, true))?;
    let (v, k) = manifest.time("operator interpolation", || build_expansions(&mut set, &settings))?;
    let mut greedy_trace = None;
    let rom = manifest.time("reduced basis", || match cfg.rom.method {
        BasisMethod::Pod => build_pod_rom(&set, &settings, &v, &k),
        BasisMethod::Greedy => {
            let g = greedy_sample(fam.as_ref(), &params, &v, &k, &cfg.greedy_settings())?;
            let rom = RomModel::project(settings.mode, g.uu.clone(), g.ufs.clone(), Some(&v), Some(&k));
            greedy_trace = Some(g);
            rom
        }
    })?;

    let mut training = Table::new(&[&["sample"][..], &param_header(cfg.swimmer)].concat());
    for (j, mu) in params.iter().enumerate() {
        training.push([vec![j.to_string()], param_cells(mu)].concat())?;
    }
    training.write(&out.join("training.csv"))?;

    let mut interp = Table::new(&["operator", "term", "entry", "singular_value"]);
    for e in [&v, &k] {
        for (q, s) in e.singular_values.iter().enumerate() {
            let entry = e.entries.get(q).map_or(String::new(), |x| x.to_string());
            interp.push(vec![e.op.name().into(), q.to_string(), entry, num(*s)])?;
        }
    }
    interp.write(&out.join("interpolation.csv"))?;

    let mut bases = Table::new(&["basis", "modes"]);
    bases.push(vec!["velocity".into(), rom.velocity_modes().to_string()])?;
    for (s, m) in rom.traction_modes().iter().enumerate() {
        bases.push(vec![format!("traction {s}"), m.to_string()])?;
    }
    bases.write(&out.join("bases.csv"))?;

    if let Some(g) = &greedy_trace {
        let mut t = Table::new(&[&["system", "iteration", "indicator"][..], &param_header(cfg.swimmer)].concat());
        for (s, tr) in g.traces.iter().enumerate() {
            for (it, ind) in tr.indicators.iter().enumerate() {
                let mu = tr.selected.get(it).map_or(vec![String::new(); cfg.swimmer.dimension()], |&c| param_cells(&params[c]));
                t.push([vec![s.to_string(), it.to_string(), num(*ind)], mu].concat())?;
            }
        }
        t.write(&out.join("greedy.csv"))?;
    }

    save_snapshots(&rom_dir, &set)?;
    save_model(&rom_dir, &rom, &identity(cfg))?;
    manifest.finish(out)?;
    Ok(OfflineOutcome { rom, snapshot_count: set.samples.len(), manifest })
}

pub struct OnlineOutcome {
    pub results: Table,
    pub errors: Option<Table>,
    pub manifest: RunManifest,
}

/// Reduced solves at the configured queries, optionally checked against
/// full-order solves.
pub fn online(cfg: &ExperimentConfig, verify: Verify) -> Result<OnlineOutcome> {
    cfg.validate()?;
    let out = &cfg.out;
    std::fs::create_dir_all(out)?;
    let mut manifest = RunManifest::new("online", &cfg.config_hash(), cfg.seed);
    let rom = manifest.time("load model", || load_compatible_model(cfg))?;
    let fam = family(cfg);
    let queries = query_params(cfg)?;
    let drag = match cfg.swimmer {
        SwimmerKind::Bacterium => Some(drag_coefficient_head(1.0, &cfg.resolution.bacterium())?),
        SwimmerKind::Eukaryote => None,
    };

    let start = Instant::now();
    let mut reduced = Vec::with_capacity(queries.len());
    for mu in &queries {
        let s = fam.build(mu)?;
        let sol = rom.solve(&s).map_err(|e| e.in_phase(format!("online query {mu:?}")))?;
        reduced.push((s, sol));
    }
    manifest.record("online per query", start.elapsed().as_secs_f64() / queries.len().max(1) as f64);

    let held = match verify {
        Verify::Fom => Some(manifest.time("full-order verification", || held_out_set(fam.as_ref(), &queries, false))?),
        Verify::None => None,
    };

    let mut header: Vec<&str> = [&["query"][..], &param_header(cfg.swimmer), &P_DOT_HEADER].concat();
    if drag.is_some() {
        header.push("eta");
    }
    if held.is_some() {
        header.extend(["traction_error", "p_dot_error"]);
        if drag.is_some() {
            header.push("eta_fom");
        }
    }
    let mut results = Table::new(&header);
    let mut warnings = Vec::new();
    for (i, (mu, (s, sol))) in queries.iter().zip(&reduced).enumerate() {
        let mut row = [vec![i.to_string()], param_cells(mu), sol.p_dot.iter().map(|&x| num(x)).collect()].concat();
        // an inaccurate model can predict negative motor power; that is a
        // result to report, not a reason to abort the run
        let mut eta = |sol, label: &str| -> Result<f64> {
            let k1 = drag.expect("bacterium");
            let kit = RigidKit::new(&s.mesh, s.x0);
            match efficiency_record(s, &kit, sol, mu[0], mu[1], k1 * mu[1], Provenance::Rom) {
                Ok(r) => Ok(r.eta),
                Err(Error::Domain(msg)) => {
                    warnings.push(format!("query {i} {mu:?}: {label} efficiency undefined: {msg}"));
                    Ok(f64::NAN)
                }
                Err(e) => Err(e),
            }
        };
        if drag.is_some() {
            row.push(num(eta(sol, "reduced")?));
        }
        if let Some(h) = &held {
            let r = &h[i].reference;
            row.push(num(traction_error(sol, r)));
            row.push(num(relative_error(&sol.p_dot, &r.p_dot)));
            if drag.is_some() {
                let fom = SwimSolution { f: r.traction.clone(), p_dot: r.p_dot, f_rigid: None, f_shape: None, grand_resistance: None };
                row.push(num(eta(&fom, "full-order")?));
            }
        }
        results.push(row)?;
    }
    results.write(&out.join("online.csv"))?;
    let warn_path = out.join("warnings.txt");
    if warnings.is_empty() {
        if warn_path.exists() {
            std::fs::remove_file(&warn_path)?;
        }
    } else {
        for w in &warnings {
            eprintln!("warning: {w}");
        }
        std::fs::write(&warn_path, warnings.join("\n") + "\n")?;
    }

    let errors = match &held {
        Some(h) if !h.is_empty() => {
            let mut t = Table::new(&["modes", "min", "mean", "max"]);
            for s in rom_error_report(&rom, h, &cfg.online.report_modes, OperatorChoice::Interpolated)? {
                t.push(vec![s.modes.to_string(), num(s.min), num(s.mean), num(s.max)])?;
            }
            t.write(&out.join("errors.csv"))?;
            Some(t)
        }
        _ => None,
    };
    manifest.finish(out)?;
    Ok(OnlineOutcome { results, errors, manifest })
}

fn search_table(g: &GridSearch) -> Result<Table> {
    let mut t = Table::new(&["n_lambda", "r_head", "u_axial", "t_motor", "eta"]);
    for r in &g.records {
        t.push(vec![num(r.n_lambda), num(r.r_head), num(r.u_axial), num(r.t_motor), num(r.eta)])?;
    }
    Ok(t)
}

pub struct OptimizeOutcome {
    pub report: OptimizationReport,
    pub comparison: Table,
    pub manifest: RunManifest,
}

/// Two-step grid optimization of the bacterium's efficiency. A stored model
/// matching the configuration is reused for the coarse step.
pub fn optimize(cfg: &ExperimentConfig, verify: Verify) -> Result<OptimizeOutcome> {
    cfg.validate()?;
    if cfg.swimmer != SwimmerKind::Bacterium {
        return Err(Error::Config("optimize needs the bacterium swimmer".into()));
    }
    let out = &cfg.out;
    std::fs::create_dir_all(out)?;
    let mut manifest = RunManifest::new("optimize", &cfg.config_hash(), cfg.seed);
    let fam = bacterium_family(cfg);
    let model = EfficiencyModel::new(fam)?;
    let o = &cfg.optimize;
    let coarse = GridSpec {
        n_lambda: Axis::new(cfg.domain.n_lambda[0], cfg.domain.n_lambda[1], o.coarse_step[0])?,
        r_head: Axis::new(cfg.domain.r_head[0], cfg.domain.r_head[1], o.coarse_step[1])?,
    };
    let rom_settings = cfg.rom_settings();
    let settings = OptimizeSettings {
        coarse,
        fine_step: o.fine_step,
        coarse_training: [cfg.training.n_lambda, cfg.training.r_head],
        focus_training: o.focus_training,
        rom: rom_settings.clone(),
        compare_full_order: o.compare_full_order && verify == Verify::Fom,
        compare_additive: o.compare_additive,
    };
    let stored = if model_dir(cfg).join(crate::io::store::MODEL_MANIFEST).exists() {
        Some(load_compatible_model(cfg)?)
    } else {
        None
    };
    let report = manifest.time("two-step optimization", || {
        two_step_optimize(&model, &settings, stored.as_ref(), |b, c| train_bacterium_rom(&fam, b, c, &rom_settings))
    })?;

    let mut comparison = Table::new(&["stage", "method", "n_lambda", "r_head", "u_axial", "t_motor", "eta", "relative_error"]);
    for row in &report.rows {
        let b = &row.best;
        comparison.push(vec![
            row.stage.name().into(),
            b.provenance.name().into(),
            num(b.n_lambda),
            num(b.r_head),
            num(b.u_axial),
            num(b.t_motor),
            num(b.eta),
            row.relative_error.map_or(String::new(), num),
        ])?;
    }
    let v = &report.verified;
    let err = (report.fine.best.eta - v.eta).abs() / v.eta.abs();
    comparison.push(vec![
        "verified".into(),
        v.provenance.name().into(),
        num(v.n_lambda),
        num(v.r_head),
        num(v.u_axial),
        num(v.t_motor),
        num(v.eta),
        num(err),
    ])?;
    comparison.write(&out.join("optimize_comparison.csv"))?;
    for (name, g) in [
        ("coarse_rom", Some(&report.coarse)),
        ("fine_rom", Some(&report.fine)),
        ("coarse_fom", report.coarse_full_order.as_ref()),
        ("fine_fom", report.fine_full_order.as_ref()),
        ("coarse_aa", report.coarse_additive.as_ref()),
        ("fine_aa", report.fine_additive.as_ref()),
    ] {
        if let Some(g) = g {
            search_table(g)?.write(&out.join(format!("{name}.csv")))?;
        }
    }
    if !report.warnings.is_empty() {
        std::fs::write(out.join("warnings.txt"), report.warnings.join("\n") + "\n")?;
    }
    manifest.finish(out)?;
    Ok(OptimizeOutcome { report, comparison, manifest })
}

pub struct StrokeRow {
    pub n_training: usize,
    pub l2_error: Option<f64>,
    pub displacement: [f64; 3],
}

pub struct StrokeOutcome {
    pub rows: Vec<StrokeRow>,
    pub full_order: Option<Vec<[f64; 6]>>,
    pub manifest: RunManifest,
}

/// Reduced reconstructions of one stroke period for each training size.
pub fn stroke(cfg: &ExperimentConfig, verify: Verify) -> Result<StrokeOutcome> {
    cfg.validate()?;
    if cfg.swimmer != SwimmerKind::Eukaryote {
        return Err(Error::Config("stroke needs the eukaryote swimmer".into()));
    }
    let out = &cfg.out;
    std::fs::create_dir_all(out)?;
    let mut manifest = RunManifest::new("stroke", &cfg.config_hash(), cfg.seed);
    let fam = stroke_family(cfg);
    let settings = cfg.rom_settings();
    let dt = fam.params.dt();
    let frames = fam.params.frames;

    let reference = match verify {
        Verify::Fom => Some(manifest.time("full-order stroke", || full_order_stroke(&fam))?),
        Verify::None => None,
    };
    let mut series: Vec<(String, Vec<[f64; 6]>)> = Vec::new();
    if let Some(r) = &reference {
        series.push(("fom".into(), r.clone()));
    }
    let mut rows = Vec::new();
    for &n in &cfg.stroke.training {
        let (_, p_dot) = manifest.time(&format!("reduced stroke {n}"), || reduced_stroke(&fam, n, &settings))?;
        let traj = integrate_rigid_motion(&p_dot, dt)?;
        let d = traj.net_displacement();
        let l2_error = reference.as_ref().map(|r| longitudinal_error(&p_dot, r).1);
        rows.push(StrokeRow { n_training: n, l2_error, displacement: [d.x, d.y, d.z] });
        series.push((format!("rom_{n}"), p_dot));
    }

    let mut t = Table::new(&["n_training", "l2_error", "dx", "dy", "dz"]);
    for r in &rows {
        t.push(vec![
            r.n_training.to_string(),
            r.l2_error.map_or(String::new(), num),
            num(r.displacement[0]),
            num(r.displacement[1]),
            num(r.displacement[2]),
        ])?;
    }
    t.write(&out.join("stroke_errors.csv"))?;

    let names: Vec<String> = series.iter().map(|(n, _)| format!("u_x_{n}")).collect();
    let header: Vec<&str> = ["frame", "time"].into_iter().chain(names.iter().map(String::as_str)).collect();
    let mut t = Table::new(&header);
    for f in 0..frames {
        let mut row = vec![f.to_string(), num(fam.params.time_of(f as i64))];
        row.extend(series.iter().map(|(_, p)| num(p[f][0])));
        t.push(row)?;
    }
    t.write(&out.join("stroke_series.csv"))?;

    let mut names = Vec::new();
    let mut trajectories = Vec::new();
    for (n, p) in &series {
        names.extend(["x", "y", "z"].map(|c| format!("{c}_{n}")));
        trajectories.push(integrate_rigid_motion(p, dt)?);
    }
    let header: Vec<&str> = ["frame", "time"].into_iter().chain(names.iter().map(String::as_str)).collect();
    let mut t = Table::new(&header);
    for f in 0..frames {
        let mut row = vec![f.to_string(), num(f as f64 * dt)];
        for tr in &trajectories {
            let p = tr.positions[f];
            row.extend([num(p.x), num(p.y), num(p.z)]);
        }
        t.push(row)?;
    }
    t.write(&out.join("stroke_trajectory.csv"))?;

    manifest.finish(out)?;
    Ok(StrokeOutcome { rows, full_order: reference, manifest })
}

/// Surface files with full-order and reduced tractions at the queries, or at
/// a default set of samples when none are configured.
pub fn export(cfg: &ExperimentConfig, verify: Verify) -> Result<RunManifest> {
    cfg.validate()?;
    let out = &cfg.out;
    let vtk_dir = out.join("vtk");
    std::fs::create_dir_all(&vtk_dir)?;
    let mut manifest = RunManifest::new("export", &cfg.config_hash(), cfg.seed);
    let fam = family(cfg);
    let queries = if cfg.online.queries.is_empty() {
        match cfg.swimmer {
            SwimmerKind::Bacterium => vec![vec![
                0.5 * (cfg.domain.n_lambda[0] + cfg.domain.n_lambda[1]),
                0.5 * (cfg.domain.r_head[0] + cfg.domain.r_head[1]),
            ]],
            SwimmerKind::Eukaryote => {
                let f = cfg.stroke.frames;
                (0..4).map(|i| vec![(i * f / 4) as f64]).collect()
            }
        }
    } else {
        cfg.online.queries.clone()
    };
    let rom = if model_dir(cfg).join(crate::io::store::MODEL_MANIFEST).exists() {
        Some(load_compatible_model(cfg)?)
    } else {
        None
    };
    let mut index = Table::new(&[&["file"][..], &param_header(cfg.swimmer), &["traction_error"]].concat());
    manifest.time("export", || {
        for (i, mu) in queries.iter().enumerate() {
            let s = fam.build(mu)?;
            let full = match verify {
                Verify::Fom => Some(FullOrder::solve(fam.as_ref(), mu)?.solution.f),
                Verify::None => None,
            };
            let reduced = rom.as_ref().map(|r| r.solve(&s)).transpose()?.map(|sol| sol.f);
            let mut scalars: Vec<(&str, Vec<f64>)> = Vec::new();
            let mut vectors: Vec<(&str, Vec<f64>)> = vec![("shape_velocity", s.shape_velocity.clone())];
            if let Some(f) = &full {
                scalars.push(("fom_traction_magnitude", magnitudes(f)));
                vectors.push(("fom_traction", f.clone()));
            }
            if let Some(f) = &reduced {
                scalars.push(("rom_traction_magnitude", magnitudes(f)));
                vectors.push(("rom_traction", f.clone()));
            }
            let mut error = String::new();
            if let (Some(a), Some(b)) = (&full, &reduced) {
                let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
                let scale = magnitudes(a).into_iter().fold(0.0, f64::max);
                scalars.push(("traction_difference", magnitudes(&diff).into_iter().map(|d| d / scale).collect()));
                error = num(relative_error(b, a));
            }
            let name = format!("{}_{i:03}.vtk", cfg.swimmer.name());
            let s_refs: Vec<(&str, &[f64])> = scalars.iter().map(|(n, v)| (*n, v.as_slice())).collect();
            let v_refs: Vec<(&str, &[f64])> = vectors.iter().map(|(n, v)| (*n, v.as_slice())).collect();
            write_vtk(&vtk_dir.join(&name), &s.mesh, &format!("{} at {mu:?}", cfg.swimmer.name()), &s_refs, &v_refs)?;
            index.push([vec![format!("vtk/{name}")], param_cells(mu), vec![error]].concat())?;
        }
        Ok(())
    })?;
    index.write(&out.join("export.csv"))?;
    manifest.finish(out)?;
    Ok(manifest)
}
