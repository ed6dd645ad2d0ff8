use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the estimation, bootstrap and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate threshold {0}: must be strictly positive")]
    DegenerateThreshold(f64),

    #[error("degenerate normalization: n * v_n must be positive")]
    DegenerateNormalization,

    #[error("no defined bootstrap replicates; cannot form an interval")]
    NoInterval,

    #[error("no fully defined replicate rows; cannot form a simultaneous band")]
    NoBand,

    #[error("pre-asymptotic oracle undefined: no threshold exceedances in the whole budget ({0})")]
    OracleUndefined(String),

    #[error("oracle cache entry missing for key `{key}` (expected file {path}); build it with `extremo oracle`")]
    MissingOracle { key: String, path: PathBuf },

    #[error("config: field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
