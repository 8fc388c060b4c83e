//! Boundary element solver and reduced-order engine for Stokes micro-swimmers.

pub mod analysis;
pub mod bem;
pub mod commands;
pub mod error;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod rom;
pub mod swimmer;

pub use error::{Error, Result};
