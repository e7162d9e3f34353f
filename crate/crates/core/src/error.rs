use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: expected {expected} samples, got {got}")]
    InputShape { expected: usize, got: usize },

    #[error("invalid metric profile: {0}")]
    InvalidProfile(String),

    #[error("non-finite {quantity} at node {node} (t = {t})")]
    NumericOverflow {
        quantity: &'static str,
        node: usize,
        t: f64,
    },

    #[error("initial slope condition violated: sup|g_s| = {sup_gs} exceeds {bound}")]
    SlopeCondition { sup_gs: f64, bound: f64 },

    #[error("step failed at t = {t_last_good} after {retries} retries: {reason}")]
    StepFailure {
        t_last_good: f64,
        retries: u32,
        reason: String,
    },

    #[error("claim evaluation needs at least 3 records, got {0}")]
    InsufficientData(usize),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("malformed {what}: {msg}")]
    Format { what: String, msg: String },

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

    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }
}
