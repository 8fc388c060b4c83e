//! Additive approach: head and tail solved in isolation, resistances summed.

use faer::Mat;

use crate::analysis::efficiency::{axial_velocity, lighthill_efficiency, EfficiencyRecord, Provenance};
use crate::bem::assembly::assemble;
use crate::bem::solve::DirichletToNeumann;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::linalg::{mat_vec, Lu};
use crate::mesh::rigid::RigidKit;
use crate::mesh::SurfaceMesh;
use crate::swimmer::Swimmer;

/// Resistance of one isolated component about a common reference point.
pub struct ComponentResistance {
    /// `P^T M F_rigid` of the component alone.
    pub rigid: Mat<f64>,
    /// `P^T M f_shape` of the component alone.
    pub shape: [f64; 6],
}

/// Solves a single component in free space.
pub fn component_resistance(mesh: &SurfaceMesh, x0: Vec3, v: &[f64]) -> Result<ComponentResistance> {
    let ops = assemble(mesh)?;
    let kit = RigidKit::new(mesh, x0);
    let dn = DirichletToNeumann::new(&ops)?;
    let f_rigid = dn.apply_mat(&kit.p);
    let f_shape = dn.apply(v)?;
    let rigid = &kit.ptm * &f_rigid;
    let shape = kit.resultant(&f_shape);
    Ok(ComponentResistance { rigid, shape })
}

fn submesh(swimmer: &Swimmer, name: &str) -> Result<(SurfaceMesh, Vec<f64>)> {
    let c = swimmer
        .component(name)
        .ok_or_else(|| Error::Domain(format!("swimmer has no component '{name}'")))?;
    let nodes = swimmer.mesh.nodes()[c.nodes.clone()].to_vec();
    let tris = swimmer.mesh.triangles()[c.elements.clone()]
        .iter()
        .map(|t| [t[0] - c.nodes.start, t[1] - c.nodes.start, t[2] - c.nodes.start])
        .collect();
    let v = swimmer.shape_velocity[3 * c.nodes.start..3 * c.nodes.end].to_vec();
    Ok((SurfaceMesh::new(nodes, tris)?, v))
}

/// Rigid velocities from summed isolated resistances, and the resulting tail
/// resultant (force, torque) about `x0`.
pub fn additive_rigid_velocity(parts: &[ComponentResistance]) -> Result<([f64; 6], Vec<[f64; 6]>)> {
    let mut a = Mat::<f64>::zeros(6, 6);
    let mut b = [0.0; 6];
    for p in parts {
        a += &p.rigid;
        for k in 0..6 {
            b[k] += p.shape[k];
        }
    }
    let x = Lu::new(a.as_ref(), "additive resistance")?.solve_vec(&b);
    let p_dot: [f64; 6] = std::array::from_fn(|k| -x[k]);
    let per_part = parts
        .iter()
        .map(|p| {
            let r = mat_vec(p.rigid.as_ref(), &p_dot);
            std::array::from_fn(|k| r[k] + p.shape[k])
        })
        .collect();
    Ok((p_dot, per_part))
}

/// Efficiency of a bacterium by the additive approach. The head and the tail
/// keep the meshes they have inside the full swimmer and share its `x0`.
pub fn additive_approach(swimmer: &Swimmer, n_lambda: f64, r_head: f64, k_head: f64) -> Result<EfficiencyRecord> {
    let motor = swimmer.motor.ok_or_else(|| Error::Domain("swimmer has no motor".into()))?;
    let (head, vh) = submesh(swimmer, "head")?;
    let (tail, vt) = submesh(swimmer, "tail")?;
    let parts = [
        component_resistance(&head, swimmer.x0, &vh)?,
        component_resistance(&tail, swimmer.x0, &vt)?,
    ];
    let (p_dot, per_part) = additive_rigid_velocity(&parts)?;
    let rel = motor.relative_rotation();
    let u_axial = axial_velocity(&p_dot, &rel)?;
    let torque = Vec3::new(per_part[1][3], per_part[1][4], per_part[1][5]);
    let t_motor = -torque.dot(&rel.normalize());
    let eta = lighthill_efficiency(k_head, u_axial, t_motor, motor.rate)?;
    Ok(EfficiencyRecord { n_lambda, r_head, u_axial, t_motor, k_head, eta, provenance: Provenance::Additive })
}
