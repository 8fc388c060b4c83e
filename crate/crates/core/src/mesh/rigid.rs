//! Rigid-body modes and the surface mass matrix.

use std::collections::BTreeMap;

use faer::Mat;

use crate::geom::Vec3;
use crate::mesh::SurfaceMesh;

/// Galerkin mass matrix of linear shape functions, stored per node and
/// applied identically to each velocity component.
#[derive(Clone, Debug, PartialEq)]
pub struct MassMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl MassMatrix {
    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// Nonzeros of node row `i`, in ascending column order.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Scalar (per-component) entry.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(0.0)
    }

    /// `M u` for a nodal vector field with three components per node.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, m) in row {
                for c in 0..3 {
                    out[3 * i + c] += m * u[3 * j + c];
                }
            }
        }
        out
    }

    /// Dense `N_delta x N_delta` form.
    pub fn to_dense(&self) -> Mat<f64> {
        let n = 3 * self.rows.len();
        let mut m = Mat::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                for c in 0..3 {
                    m[(3 * i + c, 3 * j + c)] = v;
                }
            }
        }
        m
    }
}

pub fn mass_matrix(mesh: &SurfaceMesh) -> MassMatrix {
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); mesh.node_count()];
    for (tri, &area) in mesh.triangles().iter().zip(mesh.areas()) {
        for &a in tri {
            for &b in tri {
                let w = if a == b { area / 6.0 } else { area / 12.0 };
                *rows[a].entry(b).or_insert(0.0) += w;
            }
        }
    }
    MassMatrix { rows: rows.into_iter().map(|r| r.into_iter().collect()).collect() }
}

/// Rigid-mode matrix: columns 0..3 translate along `e_i`, columns 3..6 rotate
/// about `e_i` through `x0`, i.e. `e_i x (x - x0)`.
pub fn rigid_modes(mesh: &SurfaceMesh, x0: &Vec3) -> Mat<f64> {
    let mut p = Mat::zeros(mesh.dof_count(), 6);
    for (n, x) in mesh.nodes().iter().enumerate() {
        let r = x - x0;
        for i in 0..3 {
            p[(3 * n + i, i)] = 1.0;
            let e = Vec3::ith(i, 1.0);
            let w = e.cross(&r);
            for c in 0..3 {
                p[(3 * n + c, 3 + i)] = w[c];
            }
        }
    }
    p
}

/// Rigid modes, mass matrix and the reference point, plus the cached `P^T M`.
#[derive(Clone, Debug)]
pub struct RigidKit {
    pub p: Mat<f64>,
    pub mass: MassMatrix,
    pub x0: Vec3,
    /// `P^T M`, 6 x N_delta.
    pub ptm: Mat<f64>,
}

impl RigidKit {
    pub fn new(mesh: &SurfaceMesh, x0: Vec3) -> Self {
        let p = rigid_modes(mesh, &x0);
        let mass = mass_matrix(mesh);
        let mut ptm = Mat::zeros(6, mesh.dof_count());
        for k in 0..6 {
            let mp = mass.apply(p.col_as_slice(k));
            for (j, v) in mp.into_iter().enumerate() {
                ptm[(k, j)] = v;
            }
        }
        Self { p, mass, x0, ptm }
    }

    /// Net force and torque about `x0` of a traction field: `P^T M f`.
    pub fn resultant(&self, f: &[f64]) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (0..f.len()).map(|j| self.ptm[(k, j)] * f[j]).sum();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::sphere::unit_geodesic_sphere;

    #[test]
    fn translation_and_rotation_columns() {
        let mesh = SurfaceMesh::new(
            vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let p = rigid_modes(&mesh, &Vec3::zeros());
        for n in 0..3 {
            assert_eq!([p[(3 * n, 0)], p[(3 * n + 1, 0)], p[(3 * n + 2, 0)]], [1.0, 0.0, 0.0]);
        }
        assert_eq!([p[(0, 5)], p[(1, 5)], p[(2, 5)]], [0.0, 1.0, 0.0]);
    }

    #[test]
    fn mass_sums_to_area_and_is_symmetric() {
        let mesh = unit_geodesic_sphere(4).unwrap();
        let m = mass_matrix(&mesh);
        let total: f64 = (0..m.node_count()).flat_map(|i| m.row(i).iter().map(|e| e.1)).sum();
        assert!((total - mesh.total_area()).abs() < 1e-12);
        for i in 0..m.node_count() {
            for &(j, v) in m.row(i) {
                assert_eq!(v, m.entry(j, i));
            }
        }
    }

    #[test]
    fn mass_scales_with_area() {
        let mesh = unit_geodesic_sphere(2).unwrap();
        let big = mesh.map_nodes(|p| 2.0 * p, false).unwrap();
        let (a, b) = (mass_matrix(&mesh), mass_matrix(&big));
        for i in 0..a.node_count() {
            for (x, y) in a.row(i).iter().zip(b.row(i)) {
                assert!((4.0 * x.1 - y.1).abs() < 1e-14 * y.1.abs().max(1.0));
            }
        }
    }
}
