//! Analytic checks of the assembled operators.
//!
//! A unit sphere translating at unit speed feels a drag of `6π`; rotating at
//! unit rate it feels a torque of `8π`. Both solve formulations must agree on
//! a swimmer.

use std::f64::consts::PI;

use faer::Mat;

use crate::bem::{assemble, dirichlet_to_neumann, monolithic_solve, split_solve, BemOperators};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::io::config::ResolutionPreset;
use crate::linalg::relative_error;
use crate::mesh::bacterium::{build_bacterium, BacteriumParams};
use crate::mesh::rigid::RigidKit;
use crate::mesh::sphere::{face_centered_on_x, geodesic_sphere};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub reference: f64,
    pub error: f64,
    pub tolerance: f64,
    /// Why the value could not be computed.
    pub failure: Option<String>,
}

impl Check {
    fn relative(name: &'static str, value: Result<f64>, reference: f64, tolerance: f64) -> Self {
        match value {
            Ok(value) => {
                Self { name, value, reference, error: (value - reference).abs() / reference.abs(), tolerance, failure: None }
            }
            Err(e) => Self::failed(name, reference, tolerance, e),
        }
    }

    fn failed(name: &'static str, reference: f64, tolerance: f64, e: Error) -> Self {
        Self { name, value: f64::NAN, reference, error: f64::INFINITY, tolerance, failure: Some(e.to_string()) }
    }

    pub fn passed(&self) -> bool {
        self.error <= self.tolerance
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationOptions {
    pub resolution: ResolutionPreset,
    pub sphere_frequency: usize,
    pub drag_tolerance: f64,
    pub torque_tolerance: f64,
    pub equivalence_tolerance: f64,
    /// Fault injection: reverse the sign of the double-layer kernel.
    pub flip_stresslet: bool,
}

impl ValidationOptions {
    pub fn for_resolution(resolution: ResolutionPreset) -> Self {
        match resolution {
            ResolutionPreset::Desk => Self {
                resolution,
                sphere_frequency: 7,
                drag_tolerance: 0.02,
                torque_tolerance: 0.03,
                equivalence_tolerance: 1e-8,
                flip_stresslet: false,
            },
            ResolutionPreset::Paper => Self {
                resolution,
                sphere_frequency: 12,
                drag_tolerance: 0.01,
                torque_tolerance: 0.015,
                equivalence_tolerance: 1e-8,
                flip_stresslet: false,
            },
        }
    }
}

/// `K = -(I/2 + D)` becomes `-(I/2 - D) = -I - K`.
fn flip_double_layer(ops: &mut BemOperators) {
    let n = ops.dof_count();
    ops.k = Mat::from_fn(n, n, |i, j| -ops.k[(i, j)] - if i == j { 1.0 } else { 0.0 });
}

pub fn validate(opts: &ValidationOptions) -> Result<Vec<Check>> {
    let f = opts.sphere_frequency;
    let sphere = geodesic_sphere(1.0, Vec3::zeros(), f, &face_centered_on_x(f)?)?;
    let mut ops = assemble(&sphere)?;
    if opts.flip_stresslet {
        flip_double_layer(&mut ops);
    }
    let kit = RigidKit::new(&sphere, Vec3::zeros());
    let drag = dirichlet_to_neumann(&ops, kit.p.col_as_slice(0)).map(|f| -kit.resultant(&f)[0]);
    let torque = dirichlet_to_neumann(&ops, kit.p.col_as_slice(5)).map(|f| -kit.resultant(&f)[5]);

    let swimmer = build_bacterium(&BacteriumParams::new(1.5, 1.0)?, &opts.resolution.bacterium())?;
    let mut ops = assemble(&swimmer.mesh)?;
    if opts.flip_stresslet {
        flip_double_layer(&mut ops);
    }
    let kit = RigidKit::new(&swimmer.mesh, swimmer.x0);
    let name = "split vs monolithic";
    let tol = opts.equivalence_tolerance;
    let equivalence = match (
        split_solve(&ops, &kit, &swimmer.shape_velocity),
        monolithic_solve(&ops, &kit, &swimmer.shape_velocity),
    ) {
        (Ok(a), Ok(b)) => {
            let diff = relative_error(&a.p_dot, &b.p_dot);
            Check { name, value: diff, reference: 0.0, error: diff, tolerance: tol, failure: None }
        }
        (Err(e), _) | (_, Err(e)) => Check::failed(name, 0.0, tol, e),
    };

    Ok(vec![
        Check::relative("sphere translation drag", drag, 6.0 * PI, opts.drag_tolerance),
        Check::relative("sphere rotation torque", torque, 8.0 * PI, opts.torque_tolerance),
        equivalence,
    ])
}
