//! Legacy ASCII VTK surface files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

/// Per-node magnitudes of a node-major vector field.
pub fn magnitudes(field: &[f64]) -> Vec<f64> {
    field.chunks_exact(3).map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).collect()
}

/// Renders a triangle surface with per-node scalars and node-major vectors.
pub fn render(mesh: &SurfaceMesh, title: &str, scalars: &[(&str, &[f64])], vectors: &[(&str, &[f64])]) -> Result<String> {
    let n = mesh.node_count();
    for (name, s) in scalars {
        if s.len() != n {
            return Err(Error::Dimension(format!("scalar field `{name}` has {} values for {n} nodes", s.len())));
        }
    }
    for (name, v) in vectors {
        if v.len() != 3 * n {
            return Err(Error::Dimension(format!("vector field `{name}` has {} values for {n} nodes", v.len())));
        }
    }
    let mut out = String::new();
    let title = title.lines().next().unwrap_or("");
    let _ = write!(out, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET POLYDATA\nPOINTS {n} double\n");
    for p in mesh.nodes() {
        let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
    }
    let m = mesh.element_count();
    let _ = writeln!(out, "POLYGONS {m} {}", 4 * m);
    for t in mesh.triangles() {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    if !scalars.is_empty() || !vectors.is_empty() {
        let _ = writeln!(out, "POINT_DATA {n}");
    }
    for (name, s) in scalars {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for x in s.iter() {
            let _ = writeln!(out, "{x}");
        }
    }
    for (name, v) in vectors {
        let _ = writeln!(out, "VECTORS {name} double");
        for c in v.chunks_exact(3) {
            let _ = writeln!(out, "{} {} {}", c[0], c[1], c[2]);
        }
    }
    Ok(out)
}

pub fn write_vtk(
    path: &Path,
    mesh: &SurfaceMesh,
    title: &str,
    scalars: &[(&str, &[f64])],
    vectors: &[(&str, &[f64])],
) -> Result<()> {
    std::fs::write(path, render(mesh, title, scalars, vectors)?)?;
    Ok(())
}
