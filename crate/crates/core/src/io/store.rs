//! Reduced-model and snapshot persistence.
//!
//! A model directory holds a plain-text manifest naming every block of the
//! binary container next to it, together with the container's digest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bem::{Operator, SolveMode};
use crate::error::{Error, Result};
use crate::io::config::{ResolutionPreset, SwimmerKind};
use crate::io::container::{Block, Container, VERSION};
use crate::io::sha256_hex;
use crate::rom::mdeim::AffineExpansion;
use crate::rom::model::{ReducedSystem, RomModel};
use crate::rom::snapshot::{Snapshot, SnapshotSet};

pub const MODEL_MANIFEST: &str = "rom.toml";
pub const MODEL_DATA: &str = "rom.bin";
pub const SNAPSHOT_DATA: &str = "snapshots.bin";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEntry {
    pub name: String,
    pub kind: String,
    pub rows: usize,
    pub cols: usize,
}

/// What a stored model was trained for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelIdentity {
    pub swimmer: SwimmerKind,
    pub resolution: ResolutionPreset,
    pub model_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelManifest {
    pub format_version: u32,
    pub code_version: String,
    pub identity: ModelIdentity,
    pub mode: SolveMode,
    pub dof: usize,
    pub velocity_modes: usize,
    pub traction_modes: Vec<usize>,
    pub v_terms: usize,
    pub k_terms: usize,
    pub data_file: String,
    pub data_sha256: String,
    pub blocks: Vec<BlockEntry>,
}

fn put_expansion(c: &mut Container, prefix: &str, e: &AffineExpansion) {
    c.insert(format!("{prefix}.entries"), Block::from_indices(&e.entries));
    c.insert(format!("{prefix}.interp"), Block::from_mat(&e.interp));
    c.insert(format!("{prefix}.singular_values"), Block::from_slice(&e.singular_values));
    c.insert(format!("{prefix}.energy"), Block::from_slice(&[e.energy]));
    c.insert(format!("{prefix}.size"), Block::from_indices(&[e.size]));
}

fn get_expansion(c: &Container, prefix: &str, op: Operator) -> Result<Option<AffineExpansion>> {
    if !c.names().any(|n| n == format!("{prefix}.entries")) {
        return Ok(None);
    }
    let energy = c.vec(&format!("{prefix}.energy"))?;
    let size = c.indices(&format!("{prefix}.size"))?;
    Ok(Some(AffineExpansion {
        op,
        size: *size.first().ok_or_else(|| Error::Incompatible(format!("{prefix}.size is empty")))?,
        entries: c.indices(&format!("{prefix}.entries"))?,
        interp: c.mat(&format!("{prefix}.interp"))?,
        singular_values: c.vec(&format!("{prefix}.singular_values"))?,
        energy: *energy.first().ok_or_else(|| Error::Incompatible(format!("{prefix}.energy is empty")))?,
        basis: None,
    }))
}

fn system_key(s: usize, what: &str) -> String {
    format!("system{s:02}.{what}")
}

pub fn model_container(rom: &RomModel) -> Container {
    let mut c = Container::new();
    c.insert("uu", Block::from_mat(&rom.uu));
    for (s, sys) in rom.systems.iter().enumerate() {
        c.insert(system_key(s, "uf"), Block::from_mat(&sys.uf));
        for (i, b) in sys.v_blocks.iter().enumerate() {
            c.insert(system_key(s, &format!("v{i:03}")), Block::from_mat(b));
        }
        for (i, b) in sys.k_blocks.iter().enumerate() {
            c.insert(system_key(s, &format!("k{i:03}")), Block::from_mat(b));
        }
    }
    if let Some(e) = &rom.v_exp {
        put_expansion(&mut c, "v_exp", e);
    }
    if let Some(e) = &rom.k_exp {
        put_expansion(&mut c, "k_exp", e);
    }
    c
}

pub fn model_from_container(c: &Container, mode: SolveMode, v_terms: usize, k_terms: usize) -> Result<RomModel> {
    let systems = match mode {
        SolveMode::Split => 7,
        SolveMode::Monolithic => 1,
    };
    let systems = (0..systems)
        .map(|s| {
            Ok(ReducedSystem {
                uf: c.mat(&system_key(s, "uf"))?,
                v_blocks: (0..v_terms).map(|i| c.mat(&system_key(s, &format!("v{i:03}")))).collect::<Result<_>>()?,
                k_blocks: (0..k_terms).map(|i| c.mat(&system_key(s, &format!("k{i:03}")))).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RomModel {
        mode,
        uu: c.mat("uu")?,
        systems,
        v_exp: get_expansion(c, "v_exp", Operator::V)?,
        k_exp: get_expansion(c, "k_exp", Operator::K)?,
    })
}

/// Writes the manifest and container into `dir` and returns both paths.
pub fn save_model(dir: &Path, rom: &RomModel, identity: &ModelIdentity) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let c = model_container(rom);
    let bytes = c.to_bytes();
    let data = dir.join(MODEL_DATA);
    std::fs::write(&data, &bytes)?;
    let blocks = c
        .blocks()
        .map(|(name, b)| {
            let (rows, cols) = b.shape();
            let kind = match b {
                Block::Real { .. } => "real",
                Block::Index(_) => "index",
            };
            BlockEntry { name: name.to_string(), kind: kind.into(), rows, cols }
        })
        .collect();
    let manifest = ModelManifest {
        format_version: VERSION,
        code_version: env!("CARGO_PKG_VERSION").into(),
        identity: identity.clone(),
        mode: rom.mode,
        dof: rom.dof_count(),
        velocity_modes: rom.velocity_modes(),
        traction_modes: rom.traction_modes(),
        v_terms: rom.systems.first().map_or(0, |s| s.v_blocks.len()),
        k_terms: rom.systems.first().map_or(0, |s| s.k_blocks.len()),
        data_file: MODEL_DATA.into(),
        data_sha256: sha256_hex(&bytes),
        blocks,
    };
    let path = dir.join(MODEL_MANIFEST);
    std::fs::write(&path, toml::to_string(&manifest).expect("manifest serializes"))?;
    Ok(vec![path, data])
}

pub fn load_manifest(dir: &Path) -> Result<ModelManifest> {
    let path = dir.join(MODEL_MANIFEST);
    let text = std::fs::read_to_string(&path)?;
    toml::from_str(&text).map_err(|e| Error::Format { path, message: e.to_string() })
}

pub fn load_model(dir: &Path) -> Result<(RomModel, ModelManifest)> {
    let manifest = load_manifest(dir)?;
    if manifest.format_version != VERSION {
        return Err(Error::Incompatible(format!(
            "model format version {}, expected {VERSION}",
            manifest.format_version
        )));
    }
    let path = dir.join(&manifest.data_file);
    let bytes = std::fs::read(&path)?;
    if sha256_hex(&bytes) != manifest.data_sha256 {
        return Err(Error::Format { path, message: "digest does not match the manifest".into() });
    }
    let c = Container::from_bytes(&bytes, &path)?;
    for b in &manifest.blocks {
        let found = c.blocks().find(|(n, _)| *n == b.name).map(|(_, blk)| blk.shape());
        if found != Some((b.rows, b.cols)) {
            return Err(Error::Format { path, message: format!("block `{}` disagrees with the manifest", b.name) });
        }
    }
    if c.len() != manifest.blocks.len() {
        return Err(Error::Format { path, message: "container holds blocks the manifest does not list".into() });
    }
    let rom = model_from_container(&c, manifest.mode, manifest.v_terms, manifest.k_terms)?;
    if rom.dof_count() != manifest.dof || rom.traction_modes() != manifest.traction_modes {
        return Err(Error::Format { path, message: "model shape disagrees with the manifest".into() });
    }
    Ok((rom, manifest))
}

/// Stores the snapshot solutions; operator snapshots are not kept.
pub fn save_snapshots(dir: &Path, set: &SnapshotSet) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut c = Container::new();
    c.insert("dof", Block::from_indices(&[set.dof]));
    for (j, s) in set.samples.iter().enumerate() {
        let key = |what: &str| format!("sample{j:04}.{what}");
        c.insert(key("mu"), Block::from_slice(&s.mu));
        c.insert(key("velocities"), Block::from_mat(&s.velocities));
        c.insert(key("tractions"), Block::from_mat(&s.tractions));
        c.insert(key("p_dot"), Block::from_slice(&s.p_dot));
        c.insert(key("traction"), Block::from_slice(&s.traction));
    }
    let path = dir.join(SNAPSHOT_DATA);
    c.save(&path)?;
    Ok(path)
}

pub fn load_snapshots(path: &Path) -> Result<SnapshotSet> {
    let c = Container::load(path)?;
    let dof = c.indices("dof")?.first().copied().ok_or_else(|| Error::Incompatible("dof block is empty".into()))?;
    let count = c.names().filter(|n| n.ends_with(".mu")).count();
    let samples = (0..count)
        .map(|j| {
            let key = |what: &str| format!("sample{j:04}.{what}");
            let p = c.vec(&key("p_dot"))?;
            Ok(Snapshot {
                mu: c.vec(&key("mu"))?,
                velocities: c.mat(&key("velocities"))?,
                tractions: c.mat(&key("tractions"))?,
                p_dot: p.try_into().map_err(|_| Error::Incompatible(format!("sample {j} has a malformed p_dot")))?,
                traction: c.vec(&key("traction"))?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SnapshotSet { dof, samples, v_matrices: None, k_matrices: None })
}

#[cfg(test)]
mod tests {
    use faer::Mat;

    use super::*;

    fn toy_model(mode: SolveMode) -> RomModel {
        let n = 6;
        let m = |r: usize, c: usize, s: f64| Mat::from_fn(r, c, |i, j| ((i * 7 + j * 3) as f64 * s).sin());
        let systems = if mode == SolveMode::Split { 7 } else { 1 };
        RomModel {
            mode,
            uu: m(n, 2, 0.3),
            systems: (0..systems)
                .map(|s| ReducedSystem {
                    uf: m(n, 2, 0.1 + s as f64),
                    v_blocks: vec![m(2, 2, 0.7), m(2, 2, 0.9)],
                    k_blocks: vec![m(2, 2, 1.1)],
                })
                .collect(),
            v_exp: Some(AffineExpansion {
                op: Operator::V,
                size: n,
                entries: vec![3, 17],
                interp: m(2, 2, 0.5),
                singular_values: vec![2.0, 1e-3],
                energy: 0.999,
                basis: None,
            }),
            k_exp: None,
        }
    }

    fn identity() -> ModelIdentity {
        ModelIdentity { swimmer: SwimmerKind::Bacterium, resolution: ResolutionPreset::Desk, model_hash: "abc".into() }
    }

    #[test]
    fn model_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        for mode in [SolveMode::Split, SolveMode::Monolithic] {
            let rom = toy_model(mode);
            let files = save_model(dir.path(), &rom, &identity()).unwrap();
            assert_eq!(files.len(), 2);
            let (back, manifest) = load_model(dir.path()).unwrap();
            assert_eq!(manifest.identity, identity());
            assert_eq!(model_container(&back).to_bytes(), model_container(&rom).to_bytes());
            assert!(back.k_exp.is_none());
        }
    }

    #[test]
    fn tampered_data_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        save_model(dir.path(), &toy_model(SolveMode::Split), &identity()).unwrap();
        let data = dir.path().join(MODEL_DATA);
        let mut bytes = std::fs::read(&data).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        std::fs::write(&data, bytes).unwrap();
        assert!(matches!(load_model(dir.path()), Err(Error::Format { .. })));
    }

    #[test]
    fn unknown_manifest_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        save_model(dir.path(), &toy_model(SolveMode::Split), &identity()).unwrap();
        let path = dir.path().join(MODEL_MANIFEST);
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, format!("extra = 1\n{text}")).unwrap();
        assert!(load_model(dir.path()).is_err());
    }

    #[test]
    fn snapshots_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = Snapshot {
            mu: vec![1.2, 3.4],
            velocities: Mat::from_fn(6, 7, |i, j| (i + j) as f64 / 3.0),
            tractions: Mat::from_fn(6, 7, |i, j| (i * j) as f64 / 7.0),
            p_dot: [0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            traction: vec![1.0 / 3.0; 6],
        };
        let set = SnapshotSet { dof: 6, samples: vec![s.clone(), s], v_matrices: None, k_matrices: None };
        let path = save_snapshots(dir.path(), &set).unwrap();
        let back = load_snapshots(&path).unwrap();
        assert_eq!(back.samples.len(), 2);
        assert_eq!(back.samples[1].tractions, set.samples[1].tractions);
        assert_eq!(back.samples[0].p_dot, set.samples[0].p_dot);
    }
}
