//! End-to-end acceptance run at desk resolution.
//!
//! Prints one line per criterion. Failing criteria are reported, not hidden;
//! set `ACCEPTANCE_STRICT=1` to turn any failure into a nonzero exit status.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{Matrix6, SymmetricEigen};
use swimrom::analysis::optimize::{
    cell_index, train_bacterium_rom, two_step_optimize, EfficiencyModel, GridSpec, OptimizeSettings, Stage,
};
use swimrom::analysis::stroke::{full_order_stroke, longitudinal_error, reduced_stroke};
use swimrom::analysis::Provenance;
use swimrom::bem::validation::{validate, ValidationOptions};
use swimrom::bem::{assemble, assemble_entries, monolithic_solve, split_solve, Operator, SolveMode};
use swimrom::commands::{self, Verify};
use swimrom::io::store::load_model;
use swimrom::io::{ExperimentConfig, ResolutionPreset, SwimmerKind};
use swimrom::mesh::bacterium::{BacteriumFamily, BacteriumResolution, PARAM_RANGE};
use swimrom::mesh::rigid::RigidKit;
use swimrom::mesh::sphere::geodesic_node_count;
use swimrom::mesh::stroke::{StrokeFamily, StrokeParams, StrokeResolution};
use swimrom::rom::greedy::{greedy_sample, periodic_clusters, GreedySettings};
use swimrom::rom::model::{build_expansions, build_pod_rom, RomModel, RomSettings};
use swimrom::rom::report::{held_out_set, random_frames, random_parameters, rom_error_report, ErrorStats, OperatorChoice};
use swimrom::rom::snapshot::{collect_snapshots, grid, linspace};
use swimrom::swimmer::{Swimmer, SwimmerFamily};
use swimrom::Result;

const SEED: u64 = 2024;
const HELD_OUT: usize = 10;
const STROKE_FRAMES: usize = 240;

struct Verdict {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn settings(threshold: f64, mode: SolveMode) -> RomSettings {
    RomSettings {
        mode,
        eim_threshold: threshold,
        traction_threshold: threshold,
        velocity_threshold: threshold,
        ..RomSettings::default()
    }
}

fn bacterium_family() -> BacteriumFamily {
    BacteriumFamily::new(BacteriumResolution::DESK)
}

fn stroke_family() -> StrokeFamily {
    StrokeFamily { params: StrokeParams::with_frames(STROKE_FRAMES), resolution: StrokeResolution::DESK }
}

fn frame_params(frames: &[usize]) -> Vec<Vec<f64>> {
    frames.iter().map(|&f| vec![f as f64]).collect()
}

fn rel6(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (d / b.iter().map(|x| x * x).sum::<f64>()).sqrt()
}

fn stats_line(stats: &[ErrorStats]) -> String {
    stats.iter().map(|s| format!("{}:{:.2e}", s.modes, s.mean)).collect::<Vec<_>>().join(" ")
}

/// Smallest mode count whose mean error falls below `level`.
fn first_below(stats: &[ErrorStats], level: f64) -> Option<usize> {
    stats.iter().find(|s| s.mean < level).map(|s| s.modes)
}

fn sphere_checks() -> Result<Verdict> {
    let t = Instant::now();
    let opts = ValidationOptions::for_resolution(ResolutionPreset::Desk);
    let checks = validate(&opts)?;
    let secs = t.elapsed().as_secs_f64();
    let drag = checks.iter().find(|c| c.name == "sphere translation drag").expect("drag check");
    let torque = checks.iter().find(|c| c.name == "sphere rotation torque").expect("torque check");
    Ok(Verdict {
        id: 1,
        name: "sphere drag and torque",
        passed: drag.passed() && torque.passed() && secs <= 60.0,
        detail: format!(
            "{} nodes, drag error {:.3e} (tol {}), torque error {:.3e} (tol {}), {secs:.1} s",
            geodesic_node_count(opts.sphere_frequency),
            drag.error,
            drag.tolerance,
            torque.error,
            torque.tolerance
        ),
    })
}

/// Net force and torque relative to the sum of absolute nodal contributions.
fn imbalance(kit: &RigidKit, f: &[f64]) -> f64 {
    let r = kit.resultant(f);
    (0..6)
        .map(|k| {
            let scale: f64 = (0..f.len()).map(|j| (kit.ptm[(k, j)] * f[j]).abs()).sum();
            r[k].abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Criteria 2 to 4 on a 3×3 bacterium subgrid and four stroke frames.
fn full_order_checks() -> Result<Vec<Verdict>> {
    let bact = bacterium_family();
    let stroke = stroke_family();
    let mut cases: Vec<(String, Swimmer)> = Vec::new();
    for mu in grid(&[vec![1.0, 2.2, 3.4], vec![0.6, 1.8, 3.0]]) {
        cases.push((format!("bacterium {mu:?}"), bact.build(&mu)?));
    }
    for f in [0, 60, 120, 180] {
        cases.push((format!("frame {f}"), stroke.build(&[f as f64])?));
    }
    let (mut worst_free, mut worst_equiv, mut worst_asym, mut worst_eig) = (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY);
    for (_, s) in &cases {
        let ops = assemble(&s.mesh)?;
        let kit = RigidKit::new(&s.mesh, s.x0);
        let split = split_solve(&ops, &kit, &s.shape_velocity)?;
        let mono = monolithic_solve(&ops, &kit, &s.shape_velocity)?;
        worst_free = worst_free.max(imbalance(&kit, &split.f)).max(imbalance(&kit, &mono.f));
        worst_equiv = worst_equiv.max(rel6(&mono.p_dot, &split.p_dot));
        let r = split.grand_resistance.as_ref().expect("split solution");
        let m = Matrix6::from_fn(|i, j| r[(i, j)]);
        worst_asym = worst_asym.max((m - m.transpose()).norm() / m.norm());
        let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
        worst_eig = worst_eig.max(eig.eigenvalues.max());
    }
    let n = cases.len();
    Ok(vec![
        Verdict {
            id: 2,
            name: "force and torque free",
            passed: worst_free <= 1e-8,
            detail: format!("worst relative imbalance {worst_free:.2e} over {n} swimmers, both solvers"),
        },
        Verdict {
            id: 3,
            name: "split equals monolithic",
            passed: worst_equiv <= 1e-8,
            detail: format!("worst relative p_dot difference {worst_equiv:.2e} over {n} swimmers"),
        },
        Verdict {
            id: 4,
            name: "grand resistance negative definite",
            passed: worst_eig < 0.0 && worst_asym <= 0.05,
            detail: format!("largest symmetrized eigenvalue {worst_eig:.3e}, worst asymmetry {worst_asym:.2e}"),
        },
    ])
}

/// Criteria 5 (bacterium part) and 7 on the 37×8 training grid.
fn bacterium_rom_checks() -> Result<(String, bool, Verdict)> {
    let fam = bacterium_family();
    let domain = [PARAM_RANGE, PARAM_RANGE];
    let params = grid(&[linspace(domain[0].0, domain[0].1, 37), linspace(domain[1].0, domain[1].1, 8)]);
    let t = Instant::now();
    let mut set = collect_snapshots(&fam, &params, true)?;
    let rom_settings = settings(1.0 - 1e-12, SolveMode::Split);
    let (v, k) = build_expansions(&mut set, &rom_settings)?;
    let held_params = random_parameters(&domain, HELD_OUT, SEED, &params);
    let held = held_out_set(&fam, &held_params, true)?;
    let offline = t.elapsed().as_secs_f64();

    // interpolation: exact at the selected entries, accurate elsewhere
    let (mut entry_err, mut matrix_err) = (0.0f64, 0.0f64);
    for h in &held {
        let ops = h.ops.as_ref().expect("operators kept");
        for (exp, op) in [(&v, Operator::V), (&k, Operator::K)] {
            let values = assemble_entries(&h.swimmer.mesh, op, &exp.entries)?;
            let rec = exp.reconstruct(&exp.coefficients(&values)?)?;
            let n = exp.size;
            let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (&e, &val) in exp.entries.iter().zip(&values) {
                entry_err = entry_err.max((rec[(e / n, e % n)] - val).abs() / scale);
            }
            let exact = ops.get(op);
            matrix_err = matrix_err.max((&rec - exact).norm_l2() / exact.norm_l2());
        }
    }
    let (qv, qk) = (v.terms(), k.terms());
    let eim = Verdict {
        id: 7,
        name: "operator interpolation",
        passed: entry_err <= 1e-12 && matrix_err <= 1e-3 && qv <= 260 && qk <= 260,
        detail: format!(
            "Q_V {qv}, Q_K {qk}, worst entry mismatch {entry_err:.1e}, worst off-training matrix error {matrix_err:.2e}"
        ),
    };

    let rom = build_pod_rom(&set, &rom_settings, &v, &k)?;
    drop((v, k, set));
    let counts = [2, 5, 10, 20, 30, 41, 60, 80, 100, 150, 200, 300];
    let interp = rom_error_report(&rom, &held, &counts, OperatorChoice::Interpolated)?;
    let exact = rom_error_report(&rom, &held, &counts, OperatorChoice::Exact)?;
    let five = first_below(&interp, 0.05);
    let half = first_below(&interp, 0.005);
    let converged = matches!((five, half), (Some(a), Some(b)) if a < b && b <= 120);
    // the interpolated curve levels off at the operator floor ...
    let tail: Vec<f64> = interp.iter().rev().take(3).map(|s| s.mean).collect();
    let flat = tail.iter().cloned().fold(0.0, f64::max) <= 1.5 * tail.iter().cloned().fold(f64::INFINITY, f64::min);
    // ... which exact operators go beyond by at least four digits overall
    let span = (exact[0].mean / exact.last().expect("counts").mean).log10();
    let below_floor = exact.last().expect("counts").mean < interp.last().expect("counts").mean;
    let passed = converged && flat && span >= 4.0 && below_floor;
    let detail = format!(
        "bacterium: 5% at {five:?}, 0.5% at {half:?} modes (accept <= 120); interpolated [{}]; exact [{}]; exact span {span:.2} digits; offline {offline:.0} s",
        stats_line(&interp),
        stats_line(&exact)
    );
    Ok((detail, passed, eim))
}

/// Criterion 5 (eukaryote part) and criterion 6, sharing the training set.
fn eukaryote_rom_checks() -> Result<(String, bool, Verdict)> {
    let fam = stroke_family();
    let train: Vec<usize> = (0..STROKE_FRAMES).step_by(2).collect();
    let params = frame_params(&train);
    let mut set = collect_snapshots(&fam, &params, true)?;
    let rom_settings = settings(1.0 - 1e-12, SolveMode::Split);
    let (v, k) = build_expansions(&mut set, &rom_settings)?;
    let held = held_out_set(&fam, &frame_params(&random_frames(STROKE_FRAMES, HELD_OUT, SEED, &train)?), false)?;
    let pod_rom = build_pod_rom(&set, &rom_settings, &v, &k)?;
    drop(set);

    let counts = [2, 4, 6, 8, 10, 14, 20, 30, 40];
    let pod_stats = rom_error_report(&pod_rom, &held, &counts, OperatorChoice::Interpolated)?;
    let five = first_below(&pod_stats, 0.05);
    let target = first_below(&pod_stats, 0.007);
    let converged = matches!((five, target), (Some(a), Some(b)) if a < b);
    let conv_detail = format!("eukaryote: 5% at {five:?}, 0.7% at {target:?} modes; [{}]", stats_line(&pod_stats));

    let t = Instant::now();
    let g = greedy_sample(
        &fam,
        &params,
        &v,
        &k,
        &GreedySettings { mode: SolveMode::Split, tolerance: 1e-9, max_modes: 25, ..GreedySettings::default() },
    )?;
    let greedy_secs = t.elapsed().as_secs_f64();
    let greedy_rom = RomModel::project(SolveMode::Split, g.uu.clone(), g.ufs.clone(), Some(&v), Some(&k))?;
    let matched = [3, 4, 6, 8, 10, 14, 20];
    let p = rom_error_report(&pod_rom, &held, &matched, OperatorChoice::Interpolated)?;
    let q = rom_error_report(&greedy_rom, &held, &matched, OperatorChoice::Interpolated)?;
    let ratios: Vec<f64> = p.iter().zip(&q).map(|(a, b)| b.mean / a.mean).collect();
    let parity = ratios.iter().all(|&r| (0.5..=2.0).contains(&r));

    // first ten shape-traction selections, grouped with a gap of one twelfth of the period
    let shape: Vec<usize> = g.traces[6].selected.iter().take(10).map(|&c| train[c]).collect();
    let groups = periodic_clusters(&shape, STROKE_FRAMES, STROKE_FRAMES / 12);
    let clusters: Vec<&Vec<usize>> = groups.iter().filter(|c| c.len() >= 2).collect();
    let verdict = Verdict {
        id: 6,
        name: "POD and greedy parity",
        passed: parity && clusters.len() >= 2,
        detail: format!(
            "greedy/POD mean error ratios {} at sizes {:?}; first shape selections {:?} form clusters {:?}; {} full solves, {greedy_secs:.0} s",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(" "),
            matched,
            shape,
            clusters,
            g.solved.len()
        ),
    };
    Ok((conv_detail, converged, verdict))
}

fn optimization_check() -> Result<Verdict> {
    let fam = bacterium_family();
    let model = EfficiencyModel::new(fam)?;
    let rom = settings(1.0 - 1e-12, SolveMode::Split);
    let opt = OptimizeSettings {
        coarse: GridSpec::coarse_default(),
        fine_step: [0.02, 0.02],
        coarse_training: [37, 8],
        focus_training: [5, 5],
        rom: rom.clone(),
        compare_full_order: true,
        compare_additive: true,
    };
    let t = Instant::now();
    let report = two_step_optimize(&model, &opt, None, |b, c| train_bacterium_rom(&fam, b, c, &rom))?;
    let minutes = t.elapsed().as_secs_f64() / 60.0;

    let coarse_fom = report.coarse_full_order.as_ref().expect("full-order comparison").best;
    let coarse_rom = report.coarse.best;
    let coarse_aa = report.coarse_additive.as_ref().expect("additive comparison").best;
    let axes = &opt.coarse;
    let same_cell = cell_index(&axes.n_lambda, coarse_rom.n_lambda) == cell_index(&axes.n_lambda, coarse_fom.n_lambda)
        && cell_index(&axes.r_head, coarse_rom.r_head) == cell_index(&axes.r_head, coarse_fom.r_head);
    let row = |stage: Stage, p: Provenance| {
        report.rows.iter().find(|r| r.stage == stage && r.best.provenance == p).and_then(|r| r.relative_error)
    };
    let fine_rom_err = row(Stage::Fine, Provenance::Rom).unwrap_or(f64::INFINITY);
    let fine_aa_err = row(Stage::Fine, Provenance::Additive).unwrap_or(0.0);
    let mid_r = 0.5 * (axes.r_head.lo + axes.r_head.hi);
    let aa_elsewhere = (coarse_aa.n_lambda, coarse_aa.r_head) != (coarse_fom.n_lambda, coarse_fom.r_head);
    let aa_large_r = coarse_aa.r_head >= mid_r;
    let clauses = [
        ("same coarse cell", same_cell),
        ("fine ROM error <= 0.1%", fine_rom_err <= 1e-3),
        ("fine AA error > 10%", fine_aa_err > 0.1),
        ("AA coarse optimum elsewhere", aa_elsewhere),
        ("AA coarse optimum at large R", aa_large_r),
        ("runtime <= 30 min", minutes <= 30.0),
    ];
    let failed: Vec<&str> = clauses.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Ok(Verdict {
        id: 8,
        name: "two-step optimization",
        passed: failed.is_empty(),
        detail: format!(
            "coarse FOM ({}, {}), ROM ({}, {}), AA ({}, {}); fine ROM error {fine_rom_err:.2e}, fine AA error {fine_aa_err:.3}; verified eta {:.6e}; {minutes:.1} min{}",
            coarse_fom.n_lambda,
            coarse_fom.r_head,
            coarse_rom.n_lambda,
            coarse_rom.r_head,
            coarse_aa.n_lambda,
            coarse_aa.r_head,
            report.verified.eta,
            if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
        ),
    })
}

fn stroke_check() -> Result<Verdict> {
    let fam = stroke_family();
    let reference = full_order_stroke(&fam)?;
    let rom = settings(1.0 - 1e-14, SolveMode::Split);
    let mut errors = Vec::new();
    for n in [6, 12, 40, 120] {
        let (_, p_dot) = reduced_stroke(&fam, n, &rom)?;
        errors.push((n, longitudinal_error(&p_dot, &reference).1));
    }
    let decreasing = errors.windows(2).all(|w| w[1].1 < w[0].1);
    let last = errors.last().expect("four runs").1;
    Ok(Verdict {
        id: 9,
        name: "stroke reconstruction",
        passed: decreasing && last <= 0.01,
        detail: format!(
            "{} DoF, L2 errors {}",
            fam.dof_count(),
            errors.iter().map(|(n, e)| format!("{n}:{e:.4e}")).collect::<Vec<_>>().join(" ")
        ),
    })
}

fn run_pipeline(cfg: &ExperimentConfig) -> Result<RomModel> {
    let rom = commands::offline(cfg)?.rom;
    commands::online(cfg, Verify::Fom)?;
    Ok(rom)
}

fn same_csvs(a: &Path, b: &Path) -> Result<(usize, bool)> {
    let mut names: Vec<_> = std::fs::read_dir(a)?
        .filter_map(|e| e.ok().map(|e| e.file_name()))
        .filter(|n| n.to_string_lossy().ends_with(".csv"))
        .collect();
    names.sort();
    let mut same = true;
    for n in &names {
        same &= std::fs::read(a.join(n))? == std::fs::read(b.join(n))?;
    }
    Ok((names.len(), same))
}

fn persistence_check() -> Result<Verdict> {
    let dir = tempfile::tempdir()?;
    let mut cfg = ExperimentConfig::new(SwimmerKind::Bacterium);
    cfg.training.n_lambda = 5;
    cfg.training.r_head = 5;
    cfg.seed = SEED;
    cfg.out = dir.path().join("first");
    let rom = run_pipeline(&cfg)?;
    cfg.out = dir.path().join("second");
    run_pipeline(&cfg)?;
    let (count, same) = same_csvs(&dir.path().join("first"), &dir.path().join("second"))?;

    let (back, _) = load_model(&dir.path().join("first").join(commands::MODEL_SUBDIR))?;
    let fam = bacterium_family();
    let queries = commands::query_params(&cfg)?;
    let mut bitwise = true;
    for mu in &queries {
        let s = fam.build(mu)?;
        bitwise &= rom.solve(&s)?.p_dot.map(f64::to_bits) == back.solve(&s)?.p_dot.map(f64::to_bits);
    }
    Ok(Verdict {
        id: 10,
        name: "determinism and persistence",
        passed: same && count >= 5 && bitwise,
        detail: format!(
            "{count} CSV files identical across runs: {same}; reloaded model bitwise on {} queries: {bitwise}",
            queries.len()
        ),
    })
}

fn report(v: &Verdict) {
    let status = if v.passed { "PASS" } else { "FAIL" };
    println!("criterion {:>2} {status}  {}: {}", v.id, v.name, v.detail);
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut verdicts: Vec<Verdict> = Vec::new();
    let mut record = |v: Verdict| {
        report(&v);
        verdicts.push(v);
    };
    macro_rules! step {
        ($e:expr) => {
            match $e {
                Ok(x) => Some(x),
                Err(e) => {
                    eprintln!("acceptance step failed: {e}");
                    None
                }
            }
        };
    }

    match step!(sphere_checks()) {
        Some(v) => record(v),
        None => record(Verdict { id: 1, name: "sphere drag and torque", passed: false, detail: "error".into() }),
    }
    if let Some(vs) = step!(full_order_checks()) {
        vs.into_iter().for_each(&mut record);
    }
    let bact = step!(bacterium_rom_checks());
    let euk = step!(eukaryote_rom_checks());
    let (b_detail, b_ok) = bact.as_ref().map_or(("bacterium: error".to_string(), false), |b| (b.0.clone(), b.1));
    let (e_detail, e_ok) = euk.as_ref().map_or(("eukaryote: error".to_string(), false), |e| (e.0.clone(), e.1));
    record(Verdict { id: 5, name: "ROM convergence", passed: b_ok && e_ok, detail: format!("{b_detail}; {e_detail}") });
    if let Some((_, _, v)) = euk {
        record(v);
    }
    if let Some((_, _, v)) = bact {
        record(v);
    }
    if let Some(v) = step!(optimization_check()) {
        record(v);
    }
    if let Some(v) = step!(stroke_check()) {
        record(v);
    }
    if let Some(v) = step!(persistence_check()) {
        record(v);
    }

    verdicts.sort_by_key(|v| v.id);
    let passed = verdicts.iter().filter(|v| v.passed).count();
    println!("\nsummary ({:.1} min):", start.elapsed().as_secs_f64() / 60.0);
    for v in &verdicts {
        println!("criterion {:>2} {}", v.id, if v.passed { "PASS" } else { "FAIL" });
    }
    let missing = 10 - verdicts.len();
    println!("{passed} of 10 criteria passed{}", if missing > 0 { format!(", {missing} not evaluated") } else { String::new() });

    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if missing > 0 || (strict && passed < 10) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
