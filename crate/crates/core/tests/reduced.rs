use swimrom::bem::SolveMode;
use swimrom::io::store::{load_model, save_model, ModelIdentity};
use swimrom::io::{ResolutionPreset, SwimmerKind};
use swimrom::mesh::bacterium::{BacteriumFamily, BacteriumResolution};
use swimrom::mesh::stroke::{StrokeFamily, StrokeParams, StrokeResolution};
use swimrom::rom::greedy::{greedy_sample, GreedySettings};
use swimrom::rom::model::{build_expansions, build_pod_rom, RomSettings};
use swimrom::rom::report::{held_out_set, rom_error_report, OperatorChoice};
use swimrom::rom::snapshot::collect_snapshots;
use swimrom::swimmer::{Swimmer, SwimmerFamily};
use swimrom::Result;

/// A one-parameter family whose members all coincide.
struct Frozen(BacteriumFamily);

impl SwimmerFamily for Frozen {
    fn dimension(&self) -> usize {
        1
    }

    fn build(&self, _mu: &[f64]) -> Result<Swimmer> {
        self.0.build(&[1.5, 1.0])
    }

    fn dof_count(&self) -> usize {
        self.0.dof_count()
    }
}

fn tight(mode: SolveMode) -> RomSettings {
    RomSettings {
        mode,
        eim_threshold: 1.0 - 1e-12,
        traction_threshold: 1.0 - 1e-12,
        velocity_threshold: 1.0 - 1e-12,
        ..RomSettings::default()
    }
}

fn stroke_family() -> StrokeFamily {
    StrokeFamily { params: StrokeParams::with_frames(24), resolution: StrokeResolution::DESK }
}

fn frames(list: &[usize]) -> Vec<Vec<f64>> {
    list.iter().map(|&f| vec![f as f64]).collect()
}

#[test]
fn identical_candidates_need_one_snapshot() {
    let fam = Frozen(BacteriumFamily::new(BacteriumResolution::DESK));
    let params = frames(&[0, 1, 2]);
    let mut set = collect_snapshots(&fam, &params[..2], true).unwrap();
    let (v, k) = build_expansions(&mut set, &tight(SolveMode::Split)).unwrap();
    assert_eq!((v.terms(), k.terms()), (1, 1));
    let out = greedy_sample(&fam, &params, &v, &k, &GreedySettings { tolerance: 1e-8, ..GreedySettings::default() }).unwrap();
    assert_eq!(out.solved.len(), 1);
    for tr in &out.traces {
        assert_eq!(tr.selected.len(), 1);
        assert!(*tr.indicators.last().unwrap() < 1e-8);
    }
    assert!(out.ufs.iter().all(|u| u.ncols() == 1));
}

#[test]
fn stroke_model_converges_and_reloads_bitwise() {
    let fam = stroke_family();
    let train = frames(&[0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22]);
    let mut set = collect_snapshots(&fam, &train, true).unwrap();
    let settings = tight(SolveMode::Split);
    let (v, k) = build_expansions(&mut set, &settings).unwrap();
    let rom = build_pod_rom(&set, &settings, &v, &k).unwrap();

    let held = held_out_set(&fam, &frames(&[3, 9, 17]), false).unwrap();
    let report = rom_error_report(&rom, &held, &[1, 3, 12], OperatorChoice::Interpolated).unwrap();
    assert!(report[0].mean > report[1].mean && report[1].mean > report[2].mean);
    assert!(report[2].mean < 1e-2, "{:?}", report[2]);

    let dir = tempfile::tempdir().unwrap();
    let id = ModelIdentity { swimmer: SwimmerKind::Eukaryote, resolution: ResolutionPreset::Desk, model_hash: "test".into() };
    save_model(dir.path(), &rom, &id).unwrap();
    let (back, manifest) = load_model(dir.path()).unwrap();
    assert_eq!(manifest.identity, id);
    for h in &held {
        let a = rom.solve(&h.swimmer).unwrap();
        let b = back.solve(&h.swimmer).unwrap();
        assert_eq!(a.p_dot.map(f64::to_bits), b.p_dot.map(f64::to_bits));
    }
}

#[test]
fn both_formulations_reproduce_a_training_sample() {
    let fam = stroke_family();
    let train = frames(&[0, 4, 8, 12, 16, 20]);
    let mut set = collect_snapshots(&fam, &train, true).unwrap();
    let (v, k) = build_expansions(&mut set, &tight(SolveMode::Split)).unwrap();
    let split = build_pod_rom(&set, &tight(SolveMode::Split), &v, &k).unwrap();
    let mono = build_pod_rom(&set, &tight(SolveMode::Monolithic), &v, &k).unwrap();
    // every training sample is reproduced by both formulations
    let held = held_out_set(&fam, &frames(&[8]), false).unwrap();
    let s = split.solve(&held[0].swimmer).unwrap();
    let m = mono.solve(&held[0].swimmer).unwrap();
    let r = held[0].reference.p_dot;
    let rel = |p: [f64; 6]| {
        let d: f64 = p.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum();
        (d / r.iter().map(|x| x * x).sum::<f64>()).sqrt()
    };
    assert!(rel(s.p_dot) < 1e-6, "{}", rel(s.p_dot));
    assert!(rel(m.p_dot) < 1e-6, "{}", rel(m.p_dot));
}
