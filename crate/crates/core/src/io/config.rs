//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bem::SolveMode;
use crate::error::{Error, Result};
use crate::io::sha256_hex;
use crate::mesh::bacterium::{BacteriumResolution, PARAM_RANGE};
use crate::mesh::stroke::StrokeResolution;
use crate::rom::greedy::GreedySettings;
use crate::rom::mdeim::MAX_TERMS;
use crate::rom::model::RomSettings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwimmerKind {
    Bacterium,
    Eukaryote,
}

impl SwimmerKind {
    pub fn name(self) -> &'static str {
        match self {
            SwimmerKind::Bacterium => "bacterium",
            SwimmerKind::Eukaryote => "eukaryote",
        }
    }

    /// Number of parameters per query.
    pub fn dimension(self) -> usize {
        match self {
            SwimmerKind::Bacterium => 2,
            SwimmerKind::Eukaryote => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionPreset {
    #[default]
    Desk,
    Paper,
}

impl ResolutionPreset {
    pub fn name(self) -> &'static str {
        match self {
            ResolutionPreset::Desk => "desk",
            ResolutionPreset::Paper => "paper",
        }
    }

    pub fn bacterium(self) -> BacteriumResolution {
        match self {
            ResolutionPreset::Desk => BacteriumResolution::DESK,
            ResolutionPreset::Paper => BacteriumResolution::PAPER,
        }
    }

    pub fn eukaryote(self) -> StrokeResolution {
        match self {
            ResolutionPreset::Desk => StrokeResolution::DESK,
            ResolutionPreset::Paper => StrokeResolution::PAPER,
        }
    }
}

impl std::str::FromStr for ResolutionPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(ResolutionPreset::Desk),
            "paper" => Ok(ResolutionPreset::Paper),
            other => Err(Error::Config(format!("unknown resolution '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisMethod {
    #[default]
    Pod,
    Greedy,
}

/// Parameter box of the bacterium family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub n_lambda: [f64; 2],
    pub r_head: [f64; 2],
}

impl Default for DomainConfig {
    fn default() -> Self {
        let (lo, hi) = PARAM_RANGE;
        Self { n_lambda: [lo, hi], r_head: [lo, hi] }
    }
}

/// Training sample counts: a tensor grid for the bacterium, equi-spaced
/// frames for the eukaryote.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub n_lambda: usize,
    pub r_head: usize,
    pub frames: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self { n_lambda: 37, r_head: 8, frames: 120 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RomConfig {
    pub mode: SolveMode,
    pub method: BasisMethod,
    /// Energy thresholds; unset values take a per-swimmer default.
    pub traction_threshold: Option<f64>,
    pub velocity_threshold: Option<f64>,
    pub eim_threshold: Option<f64>,
    pub max_eim_terms: usize,
    pub max_modes: Option<usize>,
    pub greedy_tolerance: f64,
    pub greedy_max_modes: usize,
}

impl Default for RomConfig {
    fn default() -> Self {
        Self {
            mode: SolveMode::Split,
            method: BasisMethod::Pod,
            traction_threshold: None,
            velocity_threshold: None,
            eim_threshold: None,
            max_eim_terms: MAX_TERMS,
            max_modes: None,
            greedy_tolerance: 1e-4,
            greedy_max_modes: 60,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OnlineConfig {
    /// Model directory; defaults to `rom` under the output directory.
    pub model: Option<PathBuf>,
    /// Explicit query parameters.
    pub queries: Vec<Vec<f64>>,
    /// Seeded random held-out queries added to the explicit ones.
    pub random: usize,
    /// Traction mode counts for the error table.
    pub report_modes: Vec<usize>,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        Self { model: None, queries: Vec::new(), random: 10, report_modes: vec![2, 5, 10, 20, 41, 60, 80, 100, 150] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub coarse_step: [f64; 2],
    pub fine_step: [f64; 2],
    pub focus_training: [usize; 2],
    pub compare_full_order: bool,
    pub compare_additive: bool,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            coarse_step: [0.2, 0.2],
            fine_step: [0.02, 0.02],
            focus_training: [5, 5],
            compare_full_order: true,
            compare_additive: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrokeConfig {
    /// Frames per stroke period.
    pub frames: usize,
    /// Training frame counts for the reconstruction sweep.
    pub training: Vec<usize>,
}

impl Default for StrokeConfig {
    fn default() -> Self {
        Self { frames: 240, training: vec![6, 12, 40, 120] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub swimmer: SwimmerKind,
    #[serde(default)]
    pub resolution: ResolutionPreset,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub rom: RomConfig,
    #[serde(default)]
    pub online: OnlineConfig,
    #[serde(default)]
    pub optimize: OptimizeConfig,
    #[serde(default)]
    pub stroke: StrokeConfig,
}

fn default_seed() -> u64 {
    2024
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Canonical part of a configuration that determines the trained model.
#[derive(Serialize)]
struct ModelKey<'a> {
    swimmer: SwimmerKind,
    resolution: ResolutionPreset,
    domain: &'a DomainConfig,
    training: &'a TrainingConfig,
    rom: &'a RomConfig,
    frames: usize,
}

impl ExperimentConfig {
    pub fn new(swimmer: SwimmerKind) -> Self {
        Self {
            swimmer,
            resolution: ResolutionPreset::Desk,
            seed: default_seed(),
            out: default_out(),
            domain: DomainConfig::default(),
            training: TrainingConfig::default(),
            rom: RomConfig::default(),
            online: OnlineConfig::default(),
            optimize: OptimizeConfig::default(),
            stroke: StrokeConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| e.in_phase(format!("reading {}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.seed > i64::MAX as u64 {
            return bad(format!("seed {} exceeds the largest TOML integer", self.seed));
        }
        let (lo, hi) = PARAM_RANGE;
        for (name, [a, b]) in [("n_lambda", self.domain.n_lambda), ("r_head", self.domain.r_head)] {
            if !(lo <= a && a <= b && b <= hi) {
                return bad(format!("domain.{name} = [{a}, {b}] must lie within [{lo}, {hi}] in order"));
            }
        }
        match self.swimmer {
            SwimmerKind::Bacterium => {
                if self.training.n_lambda == 0 || self.training.r_head == 0 {
                    return bad("empty training grid".into());
                }
            }
            SwimmerKind::Eukaryote => {
                let f = self.stroke.frames;
                if f < 2 {
                    return bad(format!("stroke.frames = {f} must be at least 2"));
                }
                if self.training.frames == 0 {
                    return bad("empty training grid".into());
                }
                for &n in std::iter::once(&self.training.frames).chain(&self.stroke.training) {
                    if n < 2 || f % n != 0 {
                        return bad(format!("{n} training frames must be at least 2 and divide {f}"));
                    }
                }
            }
        }
        for (name, t) in [
            ("traction_threshold", self.rom.traction_threshold),
            ("velocity_threshold", self.rom.velocity_threshold),
            ("eim_threshold", self.rom.eim_threshold),
        ] {
            if let Some(t) = t {
                if !(t > 0.0 && t <= 1.0) {
                    return bad(format!("rom.{name} = {t} must lie in (0, 1]"));
                }
            }
        }
        if self.rom.max_eim_terms == 0 || self.rom.max_modes == Some(0) || self.rom.greedy_max_modes == 0 {
            return bad("mode and term limits must be positive".into());
        }
        if !(self.rom.greedy_tolerance > 0.0) {
            return bad("rom.greedy_tolerance must be positive".into());
        }
        let dim = self.swimmer.dimension();
        for q in &self.online.queries {
            if q.len() != dim {
                return bad(format!("query {q:?} needs {dim} parameters"));
            }
            match self.swimmer {
                SwimmerKind::Bacterium if !q.iter().all(|x| (lo..=hi).contains(x)) => {
                    return bad(format!("query {q:?} lies outside [{lo}, {hi}]"));
                }
                SwimmerKind::Eukaryote if !(q[0].fract() == 0.0 && q[0] >= 0.0) => {
                    return bad(format!("frame query {} is not a frame index", q[0]));
                }
                _ => {}
            }
        }
        let o = &self.optimize;
        if !o.coarse_step.iter().chain(&o.fine_step).all(|&s| s > 0.0) {
            return bad("optimization steps must be positive".into());
        }
        if o.focus_training.contains(&0) {
            return bad("empty focus training grid".into());
        }
        Ok(())
    }

    /// Energy threshold used when none is configured.
    pub fn default_threshold(&self) -> f64 {
        match self.swimmer {
            SwimmerKind::Bacterium => 1.0 - 1e-12,
            SwimmerKind::Eukaryote => 1.0 - 1e-14,
        }
    }

    pub fn rom_settings(&self) -> RomSettings {
        let d = self.default_threshold();
        RomSettings {
            mode: self.rom.mode,
            traction_threshold: self.rom.traction_threshold.unwrap_or(d),
            velocity_threshold: self.rom.velocity_threshold.unwrap_or(d),
            eim_threshold: self.rom.eim_threshold.unwrap_or(d),
            max_eim_terms: self.rom.max_eim_terms,
            max_modes: self.rom.max_modes,
        }
    }

    pub fn greedy_settings(&self) -> GreedySettings {
        GreedySettings {
            mode: self.rom.mode,
            tolerance: self.rom.greedy_tolerance,
            max_modes: self.rom.greedy_max_modes,
            ..GreedySettings::default()
        }
    }

    /// Digest of the whole configuration except the output directory.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        sha256_hex(c.to_toml().as_bytes())
    }

    /// Digest of the settings that determine a trained model.
    pub fn model_hash(&self) -> String {
        let key = ModelKey {
            swimmer: self.swimmer,
            resolution: self.resolution,
            domain: &self.domain,
            training: &self.training,
            rom: &self.rom,
            frames: self.stroke.frames,
        };
        sha256_hex(toml::to_string(&key).expect("model key serializes").as_bytes())
    }
}
