use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{triangle_vector_area, Vec3};

/// Closed triangulated surface with flat elements and nodal (vertex) unknowns.
///
/// Element normals follow the right-hand rule on the stored vertex order and
/// point out of the body, into the fluid.
#[derive(Clone, Debug)]
pub struct SurfaceMesh {
    nodes: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
    node_areas: Vec<f64>,
    node_elements: Vec<Vec<usize>>,
}

impl SurfaceMesh {
    pub fn new(nodes: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if nodes.is_empty() || triangles.is_empty() {
            return Err(Error::InvalidMesh("empty mesh".into()));
        }
        let mut normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        let mut node_areas = vec![0.0; nodes.len()];
        let mut node_elements = vec![Vec::new(); nodes.len()];
        for (e, tri) in triangles.iter().enumerate() {
            let [a, b, c] = *tri;
            if a.max(b).max(c) >= nodes.len() {
                return Err(Error::InvalidMesh(format!("element {e} references a missing node")));
            }
            if a == b || b == c || a == c {
                return Err(Error::InvalidMesh(format!("element {e} has repeated nodes")));
            }
            let va = triangle_vector_area(&nodes[a], &nodes[b], &nodes[c]);
            let area = va.norm();
            if !(area > 0.0) || !area.is_finite() {
                return Err(Error::InvalidMesh(format!("element {e} is degenerate")));
            }
            normals.push(va / area);
            areas.push(area);
            for &n in tri {
                node_areas[n] += area / 3.0;
                node_elements[n].push(e);
            }
        }
        if let Some(n) = node_elements.iter().position(Vec::is_empty) {
            return Err(Error::InvalidMesh(format!("node {n} belongs to no element")));
        }
        Ok(Self {
            nodes,
            triangles,
            normals,
            areas,
            node_areas,
            node_elements,
        })
    }

    /// Concatenates meshes; node and element numbering follow the input order.
    pub fn union(parts: &[&SurfaceMesh]) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut triangles = Vec::new();
        for part in parts {
            let offset = nodes.len();
            nodes.extend_from_slice(&part.nodes);
            triangles.extend(
                part.triangles
                    .iter()
                    .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
            );
        }
        Self::new(nodes, triangles)
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Lumped nodal areas (one third of each incident element).
    pub fn node_areas(&self) -> &[f64] {
        &self.node_areas
    }

    /// Elements incident to each node, in ascending element order.
    pub fn node_elements(&self) -> &[Vec<usize>] {
        &self.node_elements
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.triangles.len()
    }

    /// Number of scalar unknowns (three velocity components per node).
    pub fn dof_count(&self) -> usize {
        3 * self.nodes.len()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Area centroid of the surface.
    pub fn area_centroid(&self) -> Vec3 {
        let mut acc = Vec3::zeros();
        for (tri, &a) in self.triangles.iter().zip(&self.areas) {
            acc += a * (self.nodes[tri[0]] + self.nodes[tri[1]] + self.nodes[tri[2]]) / 3.0;
        }
        acc / self.total_area()
    }

    /// Enclosed volume by the divergence theorem; positive for outward normals.
    pub fn enclosed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Element sets of the connected components, by shared nodes.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.nodes.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for t in &self.triangles {
            for k in 1..3 {
                let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[k]));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for (e, t) in self.triangles.iter().enumerate() {
            let root = find(&mut parent, t[0]);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, g)) => g.push(e),
                None => groups.push((root, vec![e])),
            }
        }
        groups.into_iter().map(|(_, g)| g).collect()
    }

    /// Largest `|sum(area * normal)|` over the connected components.
    pub fn closure_defect(&self) -> f64 {
        self.components()
            .iter()
            .map(|elems| {
                elems
                    .iter()
                    .fold(Vec3::zeros(), |acc, &e| acc + self.areas[e] * self.normals[e])
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Checks that every edge is shared by exactly two elements with opposite
    /// orientation and that every component encloses positive volume.
    pub fn validate_closed(&self) -> Result<()> {
        let mut edges: HashMap<(usize, usize), i32> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a, b)).or_default() += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            let back = edges.get(&(b, a)).copied().unwrap_or(0);
            if count != 1 || back != 1 {
                return Err(Error::InvalidMesh(format!(
                    "edge ({a}, {b}) is not shared by exactly two consistently oriented elements"
                )));
            }
        }
        for (c, elems) in self.components().iter().enumerate() {
            let vol: f64 = elems
                .iter()
                .map(|&e| {
                    let t = self.triangles[e];
                    let (a, b, c) = (self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
                    a.dot(&b.cross(&c)) / 6.0
                })
                .sum();
            if vol <= 0.0 {
                return Err(Error::InvalidMesh(format!("component {c} has inward normals")));
            }
        }
        Ok(())
    }

    /// Applies a point map; `flip` reverses element orientation (for reflections).
    pub fn map_nodes(&self, f: impl Fn(&Vec3) -> Vec3, flip: bool) -> Result<Self> {
        let nodes = self.nodes.iter().map(f).collect();
        let triangles = if flip {
            self.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect()
        } else {
            self.triangles.clone()
        };
        Self::new(nodes, triangles)
    }

    /// Minimum distance between a node of `self` and a node of `other`.
    pub fn min_node_distance(&self, other: &SurfaceMesh) -> f64 {
        let mut best = f64::INFINITY;
        for a in &self.nodes {
            for b in &other.nodes {
                best = best.min((a - b).norm());
            }
        }
        best
    }
}
