//! Configuration, persistence and result files.

pub mod config;
pub mod container;
pub mod manifest;
pub mod store;
pub mod table;
pub mod vtk;

pub use config::{ExperimentConfig, ResolutionPreset, SwimmerKind};
pub use container::{Block, Container};
pub use manifest::RunManifest;
pub use store::{load_model, save_model, ModelIdentity, ModelManifest};
pub use table::Table;

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
