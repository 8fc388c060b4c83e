//! A swimmer instance: geometry, components, motor and shape velocity.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::SurfaceMesh;

/// A closed surface inside the swimmer mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub name: String,
    pub nodes: Range<usize>,
    pub elements: Range<usize>,
}

/// Motor driving the relative rotation of a rigid appendage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Motor {
    pub axis: Vec3,
    pub point: Vec3,
    /// Rotation rate magnitude.
    pub rate: f64,
}

impl Motor {
    /// Angular velocity of the appendage relative to the body. The helix
    /// phase `k x - rate t` advances backwards about the axis.
    pub fn relative_rotation(&self) -> Vec3 {
        -self.rate * self.axis
    }
}

#[derive(Clone, Debug)]
pub struct Swimmer {
    pub mesh: SurfaceMesh,
    pub components: Vec<Component>,
    pub motor: Option<Motor>,
    /// Nodal shape velocity, three components per node.
    pub shape_velocity: Vec<f64>,
    /// Reference point for torques and rotations (area centroid).
    pub x0: Vec3,
}

impl Swimmer {
    pub fn new(
        mesh: SurfaceMesh,
        components: Vec<Component>,
        motor: Option<Motor>,
        shape_velocity: Vec<f64>,
    ) -> Result<Self> {
        if shape_velocity.len() != mesh.dof_count() {
            return Err(Error::Dimension(format!(
                "shape velocity has {} entries for {} unknowns",
                shape_velocity.len(),
                mesh.dof_count()
            )));
        }
        let x0 = mesh.area_centroid();
        Ok(Self { mesh, components, motor, shape_velocity, x0 })
    }

    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn dof_count(&self) -> usize {
        self.mesh.dof_count()
    }
}

/// A parametrized family of swimmers sharing one mesh topology.
pub trait SwimmerFamily: Sync {
    /// Number of scalar parameters.
    fn dimension(&self) -> usize;

    fn build(&self, mu: &[f64]) -> Result<Swimmer>;

    /// Unknown count shared by every member.
    fn dof_count(&self) -> usize;
}
