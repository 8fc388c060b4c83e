//! Reduced-order models: POD, matrix empirical interpolation, greedy
//! sampling and reduced online solves.

pub mod mdeim;
pub mod pod;
pub mod snapshot;

pub use mdeim::AffineExpansion;
pub use pod::{pod, PodBasis};
pub use snapshot::{collect_snapshots, FullOrder, Snapshot, SnapshotSet};
pub mod model;
pub use model::{build_expansions, build_pod_rom, OnlineOperators, RomModel, RomSettings};
pub mod report;
pub use report::{rom_error_report, ErrorStats, HeldOut};
pub mod greedy;
pub use greedy::{greedy_sample, GreedyOutcome, GreedySettings};
