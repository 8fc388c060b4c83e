//! Surface meshes and the swimmer geometries built from them.

pub mod bacterium;
pub mod rigid;
pub mod sphere;
pub mod stroke;
mod surface;
pub mod tube;

pub use surface::SurfaceMesh;
