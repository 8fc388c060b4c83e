use faer::Mat;
use proptest::prelude::*;
use swimrom::analysis::integrate_rigid_motion;
use swimrom::io::table::num;
use swimrom::io::{Block, Container, ExperimentConfig, SwimmerKind};
use swimrom::rom::pod::{energy_count, pod};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Mat<f64>> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| Mat::from_fn(rows, cols, |i, j| v[i + rows * j]))
}

fn gram_defect(u: &Mat<f64>) -> f64 {
    let g = u.transpose() * u;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pod_modes_are_orthonormal(s in matrix(30, 8), threshold in 0.5f64..1.0) {
        let b = pod(s.as_ref(), threshold, None).unwrap();
        prop_assert!(gram_defect(&b.u) < 1e-12);
        prop_assert!(b.energy >= threshold * (1.0 - 1e-12));
    }

    #[test]
    fn pod_projection_is_idempotent(s in matrix(25, 6), x in prop::collection::vec(-1.0f64..1.0, 25)) {
        let u = pod(s.as_ref(), 0.9, None).unwrap().u;
        let xm = Mat::from_fn(25, 1, |i, _| x[i]);
        let once = &u * (u.transpose() * &xm);
        let twice = &u * (u.transpose() * &once);
        prop_assert!((&twice - &once).norm_l2() <= 1e-12 * (1.0 + xm.norm_l2()));
    }

    #[test]
    fn low_rank_snapshots_give_their_rank(a in matrix(40, 5), b in matrix(5, 12)) {
        let s = &a * &b;
        let basis = pod(s.as_ref(), 1.0 - 1e-12, None).unwrap();
        prop_assert!(basis.len() <= 5);
        // every snapshot lies in the span
        let resid = &s - &basis.u * (basis.u.transpose() * &s);
        prop_assert!(resid.norm_l2() <= 1e-6 * s.norm_l2());
    }

    #[test]
    fn energy_count_grows_with_threshold(mut sv in prop::collection::vec(1e-3f64..10.0, 1..20), t1 in 0.1f64..1.0, t2 in 0.1f64..1.0) {
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(energy_count(&sv, lo) <= energy_count(&sv, hi));
        prop_assert!(energy_count(&sv, hi) <= sv.len());
    }

    #[test]
    fn container_round_trips_bitwise(
        m in matrix(7, 3),
        bits in prop::collection::vec(any::<u64>(), 0..40),
        idx in prop::collection::vec(0usize..1_000_000, 0..30),
    ) {
        let mut c = Container::new();
        c.insert("m", Block::from_mat(&m));
        // arbitrary bit patterns, including NaN payloads
        c.insert("raw", Block::from_slice(&bits.iter().map(|&b| f64::from_bits(b)).collect::<Vec<_>>()));
        c.insert("idx", Block::from_indices(&idx));
        let bytes = c.to_bytes();
        let back = Container::from_bytes(&bytes, std::path::Path::new("memory")).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
        prop_assert_eq!(back.indices("idx").unwrap(), idx);
        let raw: Vec<u64> = back.vec("raw").unwrap().iter().map(|x| x.to_bits()).collect();
        prop_assert_eq!(raw, bits);
    }

    #[test]
    fn truncated_containers_are_rejected(m in matrix(4, 4), cut in 1usize..100) {
        let mut c = Container::new();
        c.insert("m", Block::from_mat(&m));
        let bytes = c.to_bytes();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(Container::from_bytes(&bytes[..keep], std::path::Path::new("memory")).is_err());
    }

    #[test]
    fn config_round_trips_through_toml(seed in 0..=i64::MAX as u64, n in 1usize..50, r in 1usize..20, frames_pow in 0u32..4) {
        let mut cfg = ExperimentConfig::new(SwimmerKind::Bacterium);
        cfg.seed = seed;
        cfg.training.n_lambda = n;
        cfg.training.r_head = r;
        cfg.stroke.frames = 30 * 2usize.pow(frames_pow);
        let back = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.config_hash(), cfg.config_hash());
    }

    #[test]
    fn numbers_print_and_parse_exactly(x in prop::num::f64::NORMAL) {
        let back: f64 = num(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn pure_translation_integrates_exactly(v in prop::array::uniform3(-2.0f64..2.0), steps in 1usize..50, dt in 0.001f64..0.1) {
        let p_dot = vec![[v[0], v[1], v[2], 0.0, 0.0, 0.0]; steps];
        let t = integrate_rigid_motion(&p_dot, dt).unwrap();
        let d = t.net_displacement();
        for k in 0..3 {
            prop_assert!((d[k] - v[k] * dt * steps as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn seeds_beyond_toml_integers_are_rejected() {
    let mut cfg = ExperimentConfig::new(SwimmerKind::Eukaryote);
    cfg.seed = i64::MAX as u64 + 1;
    assert!(cfg.validate().is_err());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let err = ExperimentConfig::parse("swimmer = \"bacterium\"\n[training]\nn_lambda = 3\nr_heads = 2\n");
    assert!(err.is_err());
}
