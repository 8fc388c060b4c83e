use nalgebra::{Matrix6, SymmetricEigen};
use swimrom::bem::solve::sphere_drag_coefficient;
use swimrom::bem::{assemble, monolithic_solve, split_solve, SwimSolution};
use swimrom::mesh::bacterium::{BacteriumFamily, BacteriumResolution};
use swimrom::mesh::rigid::RigidKit;
use swimrom::mesh::stroke::{StrokeFamily, StrokeParams, StrokeResolution};
use swimrom::swimmer::{Swimmer, SwimmerFamily};

fn bacterium(mu: [f64; 2]) -> Swimmer {
    BacteriumFamily::new(BacteriumResolution::DESK).build(&mu).unwrap()
}

fn eukaryote(frame: usize) -> Swimmer {
    let fam = StrokeFamily { params: StrokeParams::with_frames(240), resolution: StrokeResolution::DESK };
    fam.build(&[frame as f64]).unwrap()
}

fn both(s: &Swimmer) -> (RigidKit, SwimSolution, SwimSolution) {
    let ops = assemble(&s.mesh).unwrap();
    let kit = RigidKit::new(&s.mesh, s.x0);
    let split = split_solve(&ops, &kit, &s.shape_velocity).unwrap();
    let mono = monolithic_solve(&ops, &kit, &s.shape_velocity).unwrap();
    (kit, split, mono)
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

fn rel6(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let n: f64 = b.iter().map(|x| x * x).sum();
    (d / n).sqrt()
}

#[test]
fn swimmers_are_force_and_torque_free() {
    for s in [bacterium([1.5, 1.0]), bacterium([3.2, 0.6]), eukaryote(0), eukaryote(70)] {
        let (kit, split, mono) = both(&s);
        assert!(imbalance(&kit, &split.f) < 1e-8, "split {}", imbalance(&kit, &split.f));
        assert!(imbalance(&kit, &mono.f) < 1e-8, "monolithic {}", imbalance(&kit, &mono.f));
    }
}

#[test]
fn split_and_monolithic_agree() {
    for s in [bacterium([0.8, 2.5]), bacterium([2.6, 1.4]), eukaryote(150)] {
        let (_, split, mono) = both(&s);
        assert!(rel6(&mono.p_dot, &split.p_dot) < 1e-8);
        let d: f64 = split.f.iter().zip(&mono.f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let n: f64 = split.f.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(d / n < 1e-8);
    }
}

#[test]
fn grand_resistance_is_negative_definite_and_nearly_symmetric() {
    for s in [bacterium([2.0, 2.0]), eukaryote(30)] {
        let (_, split, _) = both(&s);
        let r = split.grand_resistance.unwrap();
        let m = Matrix6::from_fn(|i, j| r[(i, j)]);
        let sym = (m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        assert!(eig.eigenvalues.iter().all(|&l| l < 0.0), "{:?}", eig.eigenvalues);
        assert!((m - m.transpose()).norm() / m.norm() < 0.05);
    }
}

#[test]
fn sphere_drag_approaches_stokes_law() {
    let exact = 6.0 * std::f64::consts::PI;
    let coarse = (sphere_drag_coefficient(1.0, 4).unwrap().abs() - exact).abs() / exact;
    let fine = (sphere_drag_coefficient(1.0, 7).unwrap().abs() - exact).abs() / exact;
    assert!(fine < 0.02, "{fine}");
    assert!(fine < coarse);
}

#[test]
fn frozen_shape_does_not_swim() {
    let s = bacterium([1.5, 1.0]);
    let ops = assemble(&s.mesh).unwrap();
    let kit = RigidKit::new(&s.mesh, s.x0);
    let sol = split_solve(&ops, &kit, &vec![0.0; s.dof_count()]).unwrap();
    assert!(sol.p_dot.iter().all(|&x| x.abs() < 1e-14));
}

#[test]
fn response_is_linear_in_the_shape_velocity() {
    let s = bacterium([1.2, 0.9]);
    let ops = assemble(&s.mesh).unwrap();
    let kit = RigidKit::new(&s.mesh, s.x0);
    let base = split_solve(&ops, &kit, &s.shape_velocity).unwrap();
    let doubled: Vec<f64> = s.shape_velocity.iter().map(|x| -2.0 * x).collect();
    let scaled = split_solve(&ops, &kit, &doubled).unwrap();
    let expected: [f64; 6] = std::array::from_fn(|k| -2.0 * base.p_dot[k]);
    assert!(rel6(&scaled.p_dot, &expected) < 1e-12);
}
