use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{Rotation3, Vec3};
use crate::mesh::SurfaceMesh;

const PHI: f64 = 1.618_033_988_749_895;

const ICOSA_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

fn icosahedron() -> Vec<Vec3> {
    [
        (-1.0, PHI, 0.0),
        (1.0, PHI, 0.0),
        (-1.0, -PHI, 0.0),
        (1.0, -PHI, 0.0),
        (0.0, -1.0, PHI),
        (0.0, 1.0, PHI),
        (0.0, -1.0, -PHI),
        (0.0, 1.0, -PHI),
        (PHI, 0.0, -1.0),
        (PHI, 0.0, 1.0),
        (-PHI, 0.0, -1.0),
        (-PHI, 0.0, 1.0),
    ]
    .into_iter()
    .map(|(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect()
}

#[derive(Hash, PartialEq, Eq)]
enum VertexKey {
    Corner(usize),
    Edge(usize, usize, usize),
    Interior(usize, usize, usize),
}

/// Number of nodes of a geodesic sphere of the given frequency.
pub fn geodesic_node_count(frequency: usize) -> usize {
    10 * frequency * frequency + 2
}

/// Unit geodesic sphere: every icosahedron face split into `frequency^2`
/// triangles, vertices projected radially. Orientation is outward.
pub fn unit_geodesic_sphere(frequency: usize) -> Result<SurfaceMesh> {
    if frequency == 0 {
        return Err(Error::InvalidParameter("sphere frequency must be at least 1".into()));
    }
    let n = frequency;
    let corners = icosahedron();
    let mut keys: HashMap<VertexKey, usize> = HashMap::new();
    let mut nodes: Vec<Vec3> = Vec::with_capacity(geodesic_node_count(n));
    let mut triangles = Vec::with_capacity(20 * n * n);

    for (f, face) in ICOSA_FACES.iter().enumerate() {
        let [a, b, c] = *face;
        let (pa, pb, pc) = (corners[a], corners[b], corners[c]);
        // grid vertex (i, j): weights (n - i - j, i, j) on (a, b, c)
        let mut vertex = |i: usize, j: usize| -> usize {
            let w = [(a, n - i - j), (b, i), (c, j)];
            let nonzero: Vec<(usize, usize)> = w.iter().copied().filter(|&(_, wt)| wt > 0).collect();
            let key = match nonzero.as_slice() {
                [(v, _)] => VertexKey::Corner(*v),
                [(u, wu), (v, _)] => {
                    let (lo, hi, wlo) = if u < v { (*u, *v, *wu) } else { (*v, *u, n - *wu) };
                    VertexKey::Edge(lo, hi, wlo)
                }
                _ => VertexKey::Interior(f, i, j),
            };
            *keys.entry(key).or_insert_with(|| {
                let p = (pa * (n - i - j) as f64 + pb * i as f64 + pc * j as f64) / n as f64;
                nodes.push(p.normalize());
                nodes.len() - 1
            })
        };
        for j in 0..n {
            for i in 0..n - j {
                let v00 = vertex(i, j);
                let v10 = vertex(i + 1, j);
                let v01 = vertex(i, j + 1);
                triangles.push([v00, v10, v01]);
                if i + j + 1 < n {
                    let v11 = vertex(i + 1, j + 1);
                    triangles.push([v10, v11, v01]);
                }
            }
        }
    }
    // orient every element away from the center
    for t in &mut triangles {
        let (a, b, c) = (nodes[t[0]], nodes[t[1]], nodes[t[2]]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            t.swap(1, 2);
        }
    }
    SurfaceMesh::new(nodes, triangles)
}

/// Geodesic sphere of radius `radius` about `center`, with the unit mesh
/// rotated by `orientation` first.
pub fn geodesic_sphere(
    radius: f64,
    center: Vec3,
    frequency: usize,
    orientation: &Rotation3<f64>,
) -> Result<SurfaceMesh> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("sphere radius {radius} must be positive")));
    }
    unit_geodesic_sphere(frequency)?.map_nodes(|p| center + radius * (orientation * p), false)
}

/// Rotation that sends the centroid direction of the first geodesic element to
/// `+x`, so that the x axis pierces an element interior instead of a node.
pub fn face_centered_on_x(frequency: usize) -> Result<Rotation3<f64>> {
    let unit = unit_geodesic_sphere(frequency)?;
    let t = unit.triangles()[0];
    let c = (unit.nodes()[t[0]] + unit.nodes()[t[1]] + unit.nodes()[t[2]]).normalize();
    Ok(Rotation3::rotation_between(&c, &Vec3::x()).unwrap_or_else(Rotation3::identity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn node_counts_follow_frequency() {
        for n in 1..=5 {
            let m = unit_geodesic_sphere(n).unwrap();
            assert_eq!(m.node_count(), geodesic_node_count(n));
            assert_eq!(m.element_count(), 20 * n * n);
            m.validate_closed().unwrap();
        }
    }

    #[test]
    fn area_converges_at_second_order() {
        let err = |n| 4.0 * PI - unit_geodesic_sphere(n).unwrap().total_area();
        let (e1, e2) = (err(4), err(8));
        assert!(e1 > 0.0 && e2 > 0.0);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "observed order {order}");
    }

    #[test]
    fn mirror_symmetric_about_coordinate_planes() {
        let m = unit_geodesic_sphere(3).unwrap();
        for p in m.nodes() {
            let q = Vec3::new(p.x, -p.y, p.z);
            assert!(m.nodes().iter().any(|r| (r - q).norm() < 1e-12));
        }
    }

    #[test]
    fn face_centered_orientation_keeps_nodes_off_axis() {
        let rot = face_centered_on_x(3).unwrap();
        let m = geodesic_sphere(1.0, Vec3::zeros(), 3, &rot).unwrap();
        let closest = m.nodes().iter().map(|p| (p - Vec3::x()).norm()).fold(f64::INFINITY, f64::min);
        assert!(closest > 0.1);
    }
}
