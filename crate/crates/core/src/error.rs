use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{kind} index {index} out of range (have {len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },

    #[error("allocation has {got} states but scenario has {expected} sensors")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state {state} is not legal in this scenario")]
    IllegalState { state: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state space of {required} allocations exceeds enumeration budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn index(kind: &'static str, index: usize, len: usize) -> Self {
        Error::IndexOutOfRange { kind, index, len }
    }
}
