//! Two-flagella swimmer with a synthetic planar breast-stroke beat.
//!
//! Lengths are in units of the body radius. The body has diameter 5, the
//! flagella have length 8 and thickness 0.1 in micrometres, which gives a
//! flagellum length of 3.2 and a thickness of 0.04.
//!
//! Each flagellum lies in the `z = 0` plane. Its tangent angle, measured from
//! `+x` toward `+y`, is
//!
//! ```text
//! psi(s, t) = psi0 + kappa0 s + c [sin(2 pi (s/L - t)) + sin(2 pi t)],  c = A L / (2 pi)
//! ```
//!
//! so the curvature is a static bend plus the traveling wave
//! `A cos(2 pi (s/L - t))` running from base to tip, and the base angle stays
//! clamped at `psi0`. The second flagellum is the mirror image across `y = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::sphere::{geodesic_node_count, geodesic_sphere};
use crate::mesh::tube::{min_nonlocal_distance, sweep_tube, Centerline};
use crate::mesh::SurfaceMesh;
use crate::geom::Rotation3;
use crate::swimmer::{Component, Swimmer, SwimmerFamily};

#[derive(Clone, Debug, PartialEq)]
pub struct StrokeParams {
    /// Frames per beat period.
    pub frames: usize,
    pub body_radius: f64,
    pub flagellum_length: f64,
    /// Flagellum diameter.
    pub flagellum_thickness: f64,
    /// Polar angle of the flagellum base on the body, from `+x`.
    pub base_angle: f64,
    /// Gap between the body surface and the flagellum base.
    pub base_gap: f64,
    /// Tangent angle at the base.
    pub base_tangent: f64,
    /// Static curvature.
    pub mean_curvature: f64,
    /// Amplitude of the curvature wave.
    pub wave_amplitude: f64,
}

impl Default for StrokeParams {
    fn default() -> Self {
        let length = 3.2;
        Self {
            frames: 1200,
            body_radius: 1.0,
            flagellum_length: length,
            flagellum_thickness: 0.04,
            base_angle: PI / 6.0,
            base_gap: 0.05,
            base_tangent: PI / 3.0,
            mean_curvature: 0.5 * PI / length,
            wave_amplitude: 1.0,
        }
    }
}

impl StrokeParams {
    pub fn with_frames(frames: usize) -> Self {
        Self { frames, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames < 4 {
            return Err(Error::InvalidParameter(format!(
                "stroke needs at least 4 frames per period, got {}",
                self.frames
            )));
        }
        for (name, v) in [
            ("body_radius", self.body_radius),
            ("flagellum_length", self.flagellum_length),
            ("flagellum_thickness", self.flagellum_thickness),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        if !(self.base_gap >= 0.0) {
            return Err(Error::InvalidParameter("base_gap must be non-negative".into()));
        }
        Ok(())
    }

    /// Time step between frames, with a unit period.
    pub fn dt(&self) -> f64 {
        1.0 / self.frames as f64
    }

    /// Phase time of a frame in `[0, 1)`; frames wrap around the period.
    pub fn time_of(&self, frame: i64) -> f64 {
        frame.rem_euclid(self.frames as i64) as f64 / self.frames as f64
    }

    fn wave_coefficient(&self) -> f64 {
        self.wave_amplitude * self.flagellum_length / (2.0 * PI)
    }

    pub fn tangent_angle(&self, s: f64, t: f64) -> f64 {
        let l = self.flagellum_length;
        self.base_tangent
            + self.mean_curvature * s
            + self.wave_coefficient() * ((2.0 * PI * (s / l - t)).sin() + (2.0 * PI * t).sin())
    }

    pub fn tangent_angle_rate(&self, s: f64, t: f64) -> f64 {
        let l = self.flagellum_length;
        2.0 * PI * self.wave_coefficient() * ((2.0 * PI * t).cos() - (2.0 * PI * (s / l - t)).cos())
    }

    pub fn base(&self) -> Vec3 {
        let r = self.body_radius + self.base_gap;
        Vec3::new(r * self.base_angle.cos(), r * self.base_angle.sin(), 0.0)
    }
}

/// Mesh density of the two-flagella swimmer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StrokeResolution {
    pub body_frequency: usize,
    pub segments: usize,
    pub rings: usize,
}

impl StrokeResolution {
    pub const DESK: Self = Self { body_frequency: 3, segments: 6, rings: 9 };
    pub const PAPER: Self = Self { body_frequency: 6, segments: 8, rings: 17 };

    pub fn node_count(&self) -> usize {
        geodesic_node_count(self.body_frequency) + 2 * (self.segments * self.rings + 2)
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Integrates `f(s)` over each ring interval with 5-point Gauss and returns
/// the running sums at the rings.
fn integrate_rings(rings: usize, length: f64, f: impl Fn(f64) -> Vec3) -> Vec<Vec3> {
    let h = length / (rings - 1) as f64;
    let mut out = Vec::with_capacity(rings);
    let mut acc = Vec3::zeros();
    out.push(acc);
    for k in 0..rings - 1 {
        let mid = (k as f64 + 0.5) * h;
        for (xi, w) in GAUSS5 {
            acc += 0.5 * h * w * f(mid + 0.5 * h * xi);
        }
        out.push(acc);
    }
    out
}

/// Centerline of the first flagellum at phase time `t`.
pub fn centerline(params: &StrokeParams, rings: usize, t: f64) -> Centerline {
    let base = params.base();
    let offsets = integrate_rings(rings, params.flagellum_length, |s| {
        let (sn, cs) = params.tangent_angle(s, t).sin_cos();
        Vec3::new(cs, sn, 0.0)
    });
    let h = params.flagellum_length / (rings - 1) as f64;
    let tangents = (0..rings)
        .map(|k| {
            let (sn, cs) = params.tangent_angle(k as f64 * h, t).sin_cos();
            Vec3::new(cs, sn, 0.0)
        })
        .collect();
    Centerline { points: offsets.into_iter().map(|o| base + o).collect(), tangents }
}

/// Exact time derivative of the first flagellum's tube nodes at phase time `t`.
pub fn flagellum_node_velocity(params: &StrokeParams, res: &StrokeResolution, t: f64) -> Vec<Vec3> {
    let rates = integrate_rings(res.rings, params.flagellum_length, |s| {
        let (sn, cs) = params.tangent_angle(s, t).sin_cos();
        params.tangent_angle_rate(s, t) * Vec3::new(-sn, cs, 0.0)
    });
    let h = params.flagellum_length / (res.rings - 1) as f64;
    let radius = 0.5 * params.flagellum_thickness;
    let mut out = Vec::with_capacity(res.segments * res.rings + 2);
    for (k, rate) in rates.iter().enumerate() {
        let s = k as f64 * h;
        let (sn, cs) = params.tangent_angle(s, t).sin_cos();
        let dpsi = params.tangent_angle_rate(s, t);
        // ring node = c + r (cos(th) z + sin(th) t x z), and d(t x z)/dt = dpsi t
        let db = dpsi * Vec3::new(cs, sn, 0.0);
        for l in 0..res.segments {
            let th = 2.0 * PI * l as f64 / res.segments as f64;
            out.push(rate + radius * th.sin() * db);
        }
    }
    out.push(rates[0]);
    out.push(rates[res.rings - 1]);
    out
}

/// Tube mesh of the first flagellum at phase time `t`, with intersection checks.
pub fn flagellum_mesh(params: &StrokeParams, res: &StrokeResolution, t: f64) -> Result<SurfaceMesh> {
    let line = centerline(params, res.rings, t);
    let radius = 0.5 * params.flagellum_thickness;
    for (k, p) in line.points.iter().enumerate() {
        if p.norm() <= params.body_radius + radius {
            return Err(Error::Geometry(format!(
                "flagellum ring {k} at t = {t} enters the body"
            )));
        }
        if p.y <= radius {
            return Err(Error::Geometry(format!(
                "flagellum ring {k} at t = {t} crosses the mirror plane"
            )));
        }
    }
    let spacing = params.flagellum_length / (res.rings - 1) as f64;
    let skip = (4.0 * radius / spacing).ceil() as usize + 1;
    let self_gap = min_nonlocal_distance(&line.points, skip);
    if self_gap <= 2.0 * radius {
        return Err(Error::Geometry(format!(
            "flagellum self-intersects at t = {t} (centerline gap {self_gap:.3e})"
        )));
    }
    sweep_tube(&line, radius, res.segments, &Vec3::z())
}

fn mirror(mesh: &SurfaceMesh) -> Result<SurfaceMesh> {
    mesh.map_nodes(|p| Vec3::new(p.x, -p.y, p.z), true)
}

/// Body plus both flagella at the given frame (frames wrap around the period).
pub fn build_eukaryote(params: &StrokeParams, res: &StrokeResolution, frame: i64) -> Result<Swimmer> {
    params.validate()?;
    if res.segments < 3 || res.rings < 2 {
        return Err(Error::InvalidParameter("flagellum resolution too coarse".into()));
    }
    let body = geodesic_sphere(params.body_radius, Vec3::zeros(), res.body_frequency, &Rotation3::identity())?;
    let f1 = flagellum_mesh(params, res, params.time_of(frame))?;
    let f2 = mirror(&f1)?;
    let mesh = SurfaceMesh::union(&[&body, &f1, &f2])?;

    let (nb, eb) = (body.node_count(), body.element_count());
    let (nf, ef) = (f1.node_count(), f1.element_count());
    let components = vec![
        Component { name: "body".into(), nodes: 0..nb, elements: 0..eb },
        Component { name: "flagellum1".into(), nodes: nb..nb + nf, elements: eb..eb + ef },
        Component { name: "flagellum2".into(), nodes: nb + nf..nb + 2 * nf, elements: eb + ef..eb + 2 * ef },
    ];
    let v = shape_velocity(params, res, frame)?;
    Swimmer::new(mesh, components, None, v)
}

/// Nodal shape velocity at a frame by periodic central differences; zero on the body.
pub fn shape_velocity(params: &StrokeParams, res: &StrokeResolution, frame: i64) -> Result<Vec<f64>> {
    params.validate()?;
    let next = flagellum_mesh(params, res, params.time_of(frame + 1))?;
    let prev = flagellum_mesh(params, res, params.time_of(frame - 1))?;
    let scale = 1.0 / (2.0 * params.dt());
    let nb = geodesic_node_count(res.body_frequency);
    let nf = next.node_count();
    let mut v = vec![0.0; 3 * (nb + 2 * nf)];
    for (i, (a, b)) in next.nodes().iter().zip(prev.nodes()).enumerate() {
        let d = (a - b) * scale;
        v[3 * (nb + i)..3 * (nb + i) + 3].copy_from_slice(&[d.x, d.y, d.z]);
        let j = nb + nf + i;
        v[3 * j..3 * j + 3].copy_from_slice(&[d.x, -d.y, d.z]);
    }
    Ok(v)
}

/// The stroke as a one-parameter family indexed by frame number.
#[derive(Clone, Debug)]
pub struct StrokeFamily {
    pub params: StrokeParams,
    pub resolution: StrokeResolution,
}

impl SwimmerFamily for StrokeFamily {
    fn dimension(&self) -> usize {
        1
    }

    fn build(&self, mu: &[f64]) -> Result<Swimmer> {
        let frame = mu[0].round();
        if (mu[0] - frame).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("frame {} is not an integer", mu[0])));
        }
        build_eukaryote(&self.params, &self.resolution, frame as i64)
    }

    fn dof_count(&self) -> usize {
        3 * self.resolution.node_count()
    }
}
