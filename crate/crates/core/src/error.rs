use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scenario `{name}` (available presets: {})", .available.join(", "))]
    UnknownScenario { name: String, available: Vec<String> },

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("stratum {0} has fewer than 2 windows and cannot be split")]
    StratumTooSmall(String),

    #[error("format version mismatch in {path}: expected {expected}, found {found}")]
    VersionMismatch {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("truncated payload in {path}: {detail}")]
    TruncatedPayload { path: PathBuf, detail: String },

    #[error("inconsistent dataset in {path}: {detail}")]
    Inconsistent { path: PathBuf, detail: String },

    #[error("malformed {what} in {path}: {detail}")]
    Malformed {
        what: &'static str,
        path: PathBuf,
        detail: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used for machine-parsable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::UnknownScenario { .. } => "unknown_scenario",
            Error::Shape { .. } => "shape_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::Empty(_) => "empty_input",
            Error::ZeroVariance(_) => "zero_variance",
            Error::StratumTooSmall(_) => "stratum_too_small",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::TruncatedPayload { .. } => "truncated_payload",
            Error::Inconsistent { .. } => "inconsistent",
            Error::Malformed { .. } => "malformed",
            Error::Io { .. } => "io",
        }
    }
}
