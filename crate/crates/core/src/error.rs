use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bandwidth {0}: must be finite and > 0")]
    InvalidBandwidth(f64),

    #[error("empty data set")]
    EmptyData,

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cross-validation needs at least 2 observations, got {0}")]
    TooFewForCrossValidation(usize),

    #[error("invalid bandwidth grid: {0}")]
    InvalidGrid(String),

    #[error("second derivative is zero: pointwise optimal bandwidth is undefined")]
    SingularBandwidth,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank k = {k} exceeds the number of training densities {n}; p_fa too large")]
    RankOutOfRange { k: usize, n: usize },

    #[error("header parse error on line {line}: {msg}")]
    Header { line: usize, msg: String },

    #[error("signal too short to filter: {len} samples, need at least {min}")]
    SignalTooShort { len: usize, min: usize },

    #[error("onsets not sorted ascending at position {0}")]
    UnsortedOnsets(usize),

    #[error("event too short for peak detection: {len} samples, need {min}")]
    EventTooShort { len: usize, min: usize },

    #[error("zero variance on axis {0}: cannot normalize")]
    ZeroVariance(usize),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("confusion matrix total {total} does not match tested count {tested}")]
    CountMismatch { total: usize, tested: usize },

    #[error("invalid synthetic spec: {0}")]
    InvalidSynthetic(String),

    #[error("config error on line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
