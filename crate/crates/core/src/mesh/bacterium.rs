//! Head plus helical tail swimmer.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::{Rotation3, Vec3};
use crate::mesh::sphere::{face_centered_on_x, geodesic_node_count, geodesic_sphere};
use crate::mesh::tube::{min_nonlocal_distance, sweep_tube, Centerline};
use crate::mesh::SurfaceMesh;
use crate::swimmer::{Component, Motor, Swimmer};

/// Admissible range of both bacterium parameters.
pub const PARAM_RANGE: (f64, f64) = (0.4, 4.0);

/// Default helix pitch. The tail's axial extent is `n_lambda * pitch`.
pub const PITCH: f64 = 1.0;

/// Ratio between tail thickness and head radius.
pub const THICKNESS_RATIO: f64 = 0.02 * PI / 4.0;

/// Gap between the tail root cap and the head, in units of tail thickness.
pub const ROOT_CLEARANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BacteriumParams {
    pub n_lambda: f64,
    pub r_head: f64,
    pub pitch: f64,
}

impl BacteriumParams {
    pub fn new(n_lambda: f64, r_head: f64) -> Result<Self> {
        let p = Self { n_lambda, r_head, pitch: PITCH };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = PARAM_RANGE;
        for (name, v) in [("n_lambda", self.n_lambda), ("r_head", self.r_head)] {
            if !(lo..=hi).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} outside [{lo}, {hi}]")));
            }
        }
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return Err(Error::InvalidParameter(format!("pitch {} must be positive", self.pitch)));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.pitch
    }

    /// Helix amplitude `b`.
    pub fn amplitude(&self) -> f64 {
        self.pitch / (2.0 * PI)
    }

    /// Tail thickness (tube diameter).
    pub fn thickness(&self) -> f64 {
        THICKNESS_RATIO * self.r_head
    }

    /// Axial position of the tail root.
    pub fn root(&self) -> f64 {
        self.r_head + ROOT_CLEARANCE * self.thickness()
    }

    /// Tail centerline and unit tangent at arc parameter `s` in `[0, n_lambda * PITCH]`.
    pub fn centerline(&self, s: f64) -> (Vec3, Vec3) {
        let k = self.wavenumber();
        let b = self.amplitude();
        let e = 1.0 - (-(k * s).powi(2)).exp();
        let de = 2.0 * k * k * s * (-(k * s).powi(2)).exp();
        let (sn, cs) = (k * s).sin_cos();
        let p = Vec3::new(self.root() + s, b * e * cs, b * e * sn);
        let t = Vec3::new(1.0, b * (de * cs - e * k * sn), b * (de * sn + e * k * cs));
        (p, t.normalize())
    }
}

/// Mesh density of the bacterium.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BacteriumResolution {
    pub head_frequency: usize,
    pub tail_segments: usize,
    pub tail_rings: usize,
}

impl BacteriumResolution {
    pub const DESK: Self = Self { head_frequency: 3, tail_segments: 6, tail_rings: 24 };
    pub const PAPER: Self = Self { head_frequency: 6, tail_segments: 8, tail_rings: 56 };

    pub fn node_count(&self) -> usize {
        geodesic_node_count(self.head_frequency) + self.tail_segments * self.tail_rings + 2
    }
}

/// Relative rotation rate of the tail used by default.
pub const MOTOR_RATE: f64 = 1.0;

/// Builds the bacterium at motor phase zero.
pub fn build_bacterium(params: &BacteriumParams, res: &BacteriumResolution) -> Result<Swimmer> {
    build_bacterium_at_phase(params, res, 0.0)
}

/// Builds the bacterium with the tail rotated to motor phase `theta`, so the
/// centerline reads `cos(k s - theta)`.
pub fn build_bacterium_at_phase(
    params: &BacteriumParams,
    res: &BacteriumResolution,
    theta: f64,
) -> Result<Swimmer> {
    params.validate()?;
    if res.tail_segments < 3 {
        return Err(Error::InvalidParameter(format!(
            "tail needs at least 3 circumferential segments, got {}",
            res.tail_segments
        )));
    }
    if res.tail_rings < 2 || res.head_frequency < 1 {
        return Err(Error::InvalidParameter("bacterium resolution too coarse".into()));
    }
    if res.node_count() < 200 {
        return Err(Error::InvalidParameter(format!(
            "bacterium resolution gives {} nodes, at least 200 required",
            res.node_count()
        )));
    }
    let head = geodesic_sphere(params.r_head, Vec3::zeros(), res.head_frequency, &face_centered_on_x(res.head_frequency)?)?;
    let length = params.n_lambda * params.pitch;
    let (points, tangents): (Vec<_>, Vec<_>) = (0..res.tail_rings)
        .map(|i| params.centerline(length * i as f64 / (res.tail_rings - 1) as f64))
        .unzip();
    let radius = 0.5 * params.thickness();
    let skip = (4.0 * radius / (length / (res.tail_rings - 1) as f64)).ceil() as usize + 1;
    if min_nonlocal_distance(&points, skip) <= 2.0 * radius {
        return Err(Error::Geometry("tail centerline comes closer than its thickness".into()));
    }
    let tail = sweep_tube(&Centerline { points, tangents }, radius, res.tail_segments, &Vec3::z())?;
    let phase0 = SurfaceMesh::union(&[&head, &tail])?;
    let mesh = if theta == 0.0 {
        phase0
    } else {
        let rot = Rotation3::from_axis_angle(&Vec3::x_axis(), -theta);
        phase0.map_nodes(|p| rot * p, false)?
    };

    let head_nodes = head.node_count();
    let head_elems = head.element_count();
    let components = vec![
        Component { name: "head".into(), nodes: 0..head_nodes, elements: 0..head_elems },
        Component {
            name: "tail".into(),
            nodes: head_nodes..mesh.node_count(),
            elements: head_elems..mesh.element_count(),
        },
    ];
    let motor = Motor { axis: Vec3::x(), point: Vec3::zeros(), rate: MOTOR_RATE };
    let rel = motor.relative_rotation();
    let mut v = vec![0.0; mesh.dof_count()];
    for n in components[1].nodes.clone() {
        let w = rel.cross(&(mesh.nodes()[n] - motor.point));
        v[3 * n..3 * n + 3].copy_from_slice(w.as_slice());
    }
    Swimmer::new(mesh, components, Some(motor), v)
}

/// Builds the head alone with the same mesh as in the full swimmer.
pub fn build_head(r_head: f64, res: &BacteriumResolution) -> Result<SurfaceMesh> {
    geodesic_sphere(r_head, Vec3::zeros(), res.head_frequency, &face_centered_on_x(res.head_frequency)?)
}

/// Bacteria over `mu = [n_lambda, r_head]` at a fixed resolution and pitch.
#[derive(Clone, Copy, Debug)]
pub struct BacteriumFamily {
    pub resolution: BacteriumResolution,
    pub pitch: f64,
}

impl BacteriumFamily {
    pub fn new(resolution: BacteriumResolution) -> Self {
        Self { resolution, pitch: PITCH }
    }

    pub fn params(&self, mu: &[f64]) -> Result<BacteriumParams> {
        if mu.len() != 2 {
            return Err(Error::Dimension(format!("bacterium takes 2 parameters, got {}", mu.len())));
        }
        let p = BacteriumParams { n_lambda: mu[0], r_head: mu[1], pitch: self.pitch };
        p.validate()?;
        Ok(p)
    }
}

impl crate::swimmer::SwimmerFamily for BacteriumFamily {
    fn dimension(&self) -> usize {
        2
    }

    fn build(&self, mu: &[f64]) -> Result<Swimmer> {
        build_bacterium(&self.params(mu)?, &self.resolution)
    }

    fn dof_count(&self) -> usize {
        3 * self.resolution.node_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centerline_starts_on_axis() {
        let p = BacteriumParams::new(1.0, 1.0).unwrap();
        let (c, t) = p.centerline(0.0);
        assert_eq!(c.y, 0.0);
        assert_eq!(c.z, 0.0);
        assert_eq!(t, Vec3::x());
    }

    #[test]
    fn thickness_for_unit_head() {
        let p = BacteriumParams::new(1.0, 1.0).unwrap();
        assert!((p.thickness() - 0.015_707_963).abs() < 1e-8);
    }

    #[test]
    fn rejects_out_of_range_params() {
        assert!(BacteriumParams::new(0.3, 1.0).is_err());
        assert!(BacteriumParams::new(1.0, 4.1).is_err());
    }

    #[test]
    fn rejects_two_segment_tail() {
        let p = BacteriumParams::new(1.0, 1.0).unwrap();
        let res = BacteriumResolution { tail_segments: 2, tail_rings: 80, ..BacteriumResolution::DESK };
        assert!(build_bacterium(&p, &res).is_err());
    }

    #[test]
    fn desk_mesh_is_closed_with_two_components() {
        let p = BacteriumParams::new(2.38, 0.8).unwrap();
        let s = build_bacterium(&p, &BacteriumResolution::DESK).unwrap();
        s.mesh.validate_closed().unwrap();
        assert_eq!(s.mesh.components().len(), 2);
        assert_eq!(s.mesh.node_count(), BacteriumResolution::DESK.node_count());
    }

    #[test]
    fn tail_velocity_is_rigid_rotation_about_axis() {
        let p = BacteriumParams::new(1.5, 1.0).unwrap();
        let s = build_bacterium(&p, &BacteriumResolution::DESK).unwrap();
        let head = &s.components[0];
        for n in head.nodes.clone() {
            assert_eq!(&s.shape_velocity[3 * n..3 * n + 3], &[0.0; 3]);
        }
        for n in s.components[1].nodes.clone() {
            let x = s.mesh.nodes()[n];
            let v = &s.shape_velocity[3 * n..3 * n + 3];
            assert_eq!(v[0], 0.0);
            assert!((v[1] - x.z).abs() < 1e-15);
            assert!((v[2] + x.y).abs() < 1e-15);
        }
    }

    #[test]
    fn phase_rotation_matches_shifted_centerline() {
        let p = BacteriumParams::new(1.0, 1.0).unwrap();
        let res = BacteriumResolution::DESK;
        let theta = 0.7;
        let s = build_bacterium_at_phase(&p, &res, theta).unwrap();
        // ring centroids sit on the rotated centerline
        let head_nodes = s.components[0].nodes.end;
        let ring = (res.tail_rings - 1) / 2;
        let ring_center: Vec3 = (0..res.tail_segments)
            .map(|l| s.mesh.nodes()[head_nodes + ring * res.tail_segments + l])
            .sum::<Vec3>()
            / res.tail_segments as f64;
        let s_ring = ring as f64 / (res.tail_rings - 1) as f64;
        let (c2, _) = p.centerline(s_ring);
        let (r2, a2) = (c2.y.hypot(c2.z), c2.z.atan2(c2.y));
        let exp2 = Vec3::new(c2.x, r2 * (a2 - theta).cos(), r2 * (a2 - theta).sin());
        assert!((ring_center - exp2).norm() < 1e-12);
    }
}
