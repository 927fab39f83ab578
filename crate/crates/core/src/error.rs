use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library. Variants name the failing operation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch at layer {layer}: expected {expected}, got {got}")]
    DimensionMismatch {
        layer: usize,
        expected: usize,
        got: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument to {op}: {msg}")]
    InvalidArgument { op: &'static str, msg: String },

    #[error("NaN encountered in {0}")]
    NotANumber(&'static str),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    /// Carries the parameters at the end of the last epoch that stayed finite.
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Diverged {
        epoch: usize,
        last_finite: Vec<crate::nncore::NetworkParams>,
    },

    #[error("zero-probability outcome in {op} for {count} sample(s), first index {first}")]
    ZeroProbability {
        op: &'static str,
        count: usize,
        first: usize,
    },

    #[error("{op}: {msg}")]
    Unsupported { op: &'static str, msg: String },

    #[error("bounds violated at N = {n}: {lower} <= {value} <= {upper} fails")]
    BoundViolation {
        n: usize,
        lower: f64,
        value: f64,
        upper: f64,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(op: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidArgument {
            op,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
