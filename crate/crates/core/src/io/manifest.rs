//! Per-run manifest: configuration digest, timings and file inventory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::sha256_hex;

pub const RUN_MANIFEST: &str = "manifest.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    /// Path relative to the run directory, with `/` separators.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub timings: Vec<Timing>,
    pub files: Vec<FileEntry>,
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).expect("walked below the root").to_path_buf());
        }
    }
    Ok(())
}

impl RunManifest {
    pub fn new(command: &str, config_hash: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            config_hash: config_hash.into(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            timings: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn record(&mut self, phase: &str, seconds: f64) {
        self.timings.push(Timing { phase: phase.into(), seconds: seconds.max(0.0) });
    }

    /// Runs `f`, records its wall time under `phase` and tags errors with it.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_phase(phase));
        self.record(phase, start.elapsed().as_secs_f64());
        out
    }

    pub fn seconds(&self, phase: &str) -> Option<f64> {
        self.timings.iter().find(|t| t.phase == phase).map(|t| t.seconds)
    }

    /// Lists every file under `dir` and writes the manifest there.
    pub fn finish(&mut self, dir: &Path) -> Result<PathBuf> {
        let mut paths = Vec::new();
        walk(dir, dir, &mut paths)?;
        paths.retain(|p| p != Path::new(RUN_MANIFEST));
        paths.sort();
        self.files = paths
            .iter()
            .map(|rel| {
                let bytes = std::fs::read(dir.join(rel))?;
                let path = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                Ok(FileEntry { path, bytes: bytes.len() as u64, sha256: sha256_hex(&bytes) })
            })
            .collect::<Result<_>>()?;
        let path = dir.join(RUN_MANIFEST);
        std::fs::write(&path, toml::to_string(self).expect("manifest serializes"))?;
        Ok(path)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(RUN_MANIFEST);
        let text = std::fs::read_to_string(&path)?;
        toml::from_str(&text).map_err(|e| Error::Format { path, message: e.to_string() })
    }
}
