use crate::error::{Error, Result};
use crate::geom::{any_orthogonal, unit, Vec3};
use crate::mesh::SurfaceMesh;

/// Centerline samples with unit tangents, as consumed by [`sweep_tube`].
#[derive(Clone, Debug)]
pub struct Centerline {
    pub points: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
}

impl Centerline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rotation-minimizing frame normals along the centerline (double reflection).
/// The first normal is `reference` projected onto the plane normal to the first tangent.
pub fn transport_normals(line: &Centerline, reference: &Vec3) -> Vec<Vec3> {
    let t0 = line.tangents[0];
    let mut r = unit(&(reference - t0 * t0.dot(reference))).unwrap_or_else(|| any_orthogonal(&t0));
    let mut normals = Vec::with_capacity(line.len());
    normals.push(r);
    for k in 0..line.len() - 1 {
        let v1 = line.points[k + 1] - line.points[k];
        let c1 = v1.dot(&v1);
        if c1 == 0.0 {
            normals.push(r);
            continue;
        }
        let rl = r - v1 * (2.0 / c1) * v1.dot(&r);
        let tl = line.tangents[k] - v1 * (2.0 / c1) * v1.dot(&line.tangents[k]);
        let v2 = line.tangents[k + 1] - tl;
        let c2 = v2.dot(&v2);
        r = if c2 == 0.0 { rl } else { rl - v2 * (2.0 / c2) * v2.dot(&rl) };
        // re-project to stay exactly normal to the tangent
        let t = line.tangents[k + 1];
        r = unit(&(r - t * t.dot(&r))).unwrap_or_else(|| any_orthogonal(&t));
        normals.push(r);
    }
    normals
}

/// Closed tube of the given radius swept along `line`, with flat fan end caps.
///
/// Node layout: `segments` nodes per ring, ring after ring, then the start and
/// end cap centers.
pub fn sweep_tube(line: &Centerline, radius: f64, segments: usize, reference: &Vec3) -> Result<SurfaceMesh> {
    if segments < 3 {
        return Err(Error::InvalidParameter(format!(
            "tube needs at least 3 circumferential segments, got {segments}"
        )));
    }
    if line.len() < 2 {
        return Err(Error::InvalidParameter("tube centerline needs at least two rings".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("tube radius {radius} must be positive")));
    }
    let normals = transport_normals(line, reference);
    let rings = line.len();
    let mut nodes = Vec::with_capacity(rings * segments + 2);
    for k in 0..rings {
        let t = line.tangents[k];
        let n = normals[k];
        let b = t.cross(&n);
        for l in 0..segments {
            let theta = 2.0 * std::f64::consts::PI * l as f64 / segments as f64;
            nodes.push(line.points[k] + radius * (theta.cos() * n + theta.sin() * b));
        }
    }
    let start = nodes.len();
    nodes.push(line.points[0]);
    let end = nodes.len();
    nodes.push(line.points[rings - 1]);

    let idx = |k: usize, l: usize| k * segments + (l % segments);
    let mut triangles = Vec::with_capacity(2 * segments * rings);
    for k in 0..rings - 1 {
        for l in 0..segments {
            triangles.push([idx(k, l), idx(k, l + 1), idx(k + 1, l)]);
            triangles.push([idx(k, l + 1), idx(k + 1, l + 1), idx(k + 1, l)]);
        }
    }
    for l in 0..segments {
        triangles.push([start, idx(0, l + 1), idx(0, l)]);
        triangles.push([end, idx(rings - 1, l), idx(rings - 1, l + 1)]);
    }
    SurfaceMesh::new(nodes, triangles)
}

/// Smallest distance between centerline samples that are more than `skip`
/// samples apart. Used to reject self-intersecting tubes.
pub fn min_nonlocal_distance(points: &[Vec3], skip: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + skip + 1..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn straight(len: f64, rings: usize) -> Centerline {
        let points = (0..rings)
            .map(|k| Vec3::new(len * k as f64 / (rings - 1) as f64, 0.0, 0.0))
            .collect();
        Centerline { points, tangents: vec![Vec3::x(); rings] }
    }

    #[test]
    fn cylinder_is_closed_and_outward() {
        let m = sweep_tube(&straight(2.0, 5), 0.1, 8, &Vec3::y()).unwrap();
        m.validate_closed().unwrap();
        assert_eq!(m.node_count(), 5 * 8 + 2);
        assert!(m.closure_defect() < 1e-12);
        // inscribed octagonal prism volume
        let expected = 0.5 * 8.0 * 0.01 * (2.0 * PI / 8.0).sin() * 2.0;
        assert!((m.enclosed_volume() - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_too_few_segments() {
        assert!(sweep_tube(&straight(1.0, 3), 0.1, 2, &Vec3::y()).is_err());
    }

    #[test]
    fn transported_frame_stays_orthonormal_on_a_helix() {
        let n = 60;
        let (b, k) = (0.3, 2.0 * PI);
        let points = (0..n)
            .map(|i| {
                let s = 2.0 * i as f64 / (n - 1) as f64;
                Vec3::new(s, b * (k * s).cos(), b * (k * s).sin())
            })
            .collect();
        let tangents = (0..n)
            .map(|i| {
                let s = 2.0 * i as f64 / (n - 1) as f64;
                Vec3::new(1.0, -b * k * (k * s).sin(), b * k * (k * s).cos()).normalize()
            })
            .collect();
        let line = Centerline { points, tangents };
        let normals = transport_normals(&line, &Vec3::y());
        for (t, nrm) in line.tangents.iter().zip(&normals) {
            assert!(t.dot(nrm).abs() < 1e-12);
            assert!((nrm.norm() - 1.0).abs() < 1e-12);
        }
        let m = sweep_tube(&line, 0.02, 6, &Vec3::y()).unwrap();
        m.validate_closed().unwrap();
    }
}
