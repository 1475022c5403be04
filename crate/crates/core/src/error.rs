use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("logarithm is singular at the antipode q = -1")]
    AntipodeSingular,

    #[error("base point is not a unit vector (|phi| = {norm})")]
    InvalidBasePoint { norm: f64 },

    #[error("form degree overflow: {left} + {right} > 3")]
    DegreeOverflow { left: usize, right: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("target mismatch: expected {expected}, found {found}")]
    TargetMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("site {site} is off the target manifold (deviation {deviation:e})")]
    OffTarget { site: usize, deviation: f64 },

    #[error("gauge map leaves the stabilizer of the reference at site {site} (deviation {deviation:e})")]
    NotInStabilizer { site: usize, deviation: f64 },

    #[error("primary fluxes {fluxes:?} are not all zero; Hopf number undefined")]
    NonzeroPrimaryFlux { fluxes: [f64; 3] },

    #[error("spectral solve failed: {0}")]
    SpectralSolveFailure(String),

    #[error("field hits the antipode -i at site {site}; Hopf lift undefined there")]
    AntipodeHit { site: usize },

    #[error("invalid flow configuration: {0}")]
    InvalidFlowConfig(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Configuration errors always carry the 1-based line they refer to
/// (0 when the problem is a missing key rather than a bad line).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    TypeMismatch {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },

    #[error("line {line}: initializer `{initializer}` is incompatible with target `{target}`")]
    IncompatibleInitializer {
        line: usize,
        initializer: String,
        target: String,
    },

    #[error("line {line}: malformed line `{text}` (expected `key = value`)")]
    Malformed { line: usize, text: String },

    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}
