use std::path::PathBuf;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("geometry rejected: {0}")]
    Geometry(String),

    #[error("kernel evaluated at coincident points")]
    CoincidentPoints,

    #[error("assembly produced a non-finite entry in row {row}, element {element}")]
    NonFinite { row: usize, element: usize },

    #[error("index {index} out of range for a {size}-entry operator")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("singular system ({context}): pivot ratio {pivot_ratio:.3e}")]
    Singular { context: String, pivot_ratio: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty basis: all snapshots vanish")]
    EmptyBasis,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("incompatible model: {0}")]
    Incompatible(String),

    #[error("{phase}: {inner}")]
    Phase { phase: String, inner: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Wraps the error with the name of the pipeline phase it came from.
    pub fn in_phase(self, phase: impl Into<String>) -> Self {
        Error::Phase {
            phase: phase.into(),
            inner: Box::new(self),
        }
    }
}
