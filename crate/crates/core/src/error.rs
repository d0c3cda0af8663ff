use std::path::PathBuf;

use crate::protocol::RunRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("infeasible degree bound: a tree on {n} vertices cannot have max degree {delta}")]
    InfeasibleDegreeBound { n: usize, delta: usize },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("node {node} has degree {degree}, exceeding the bound {delta}")]
    DegreeBoundViolated { node: usize, degree: usize, delta: usize },

    #[error("non-monotone schedule access: round {requested} requested after round {last}")]
    NonMonotoneAccess { requested: u64, last: u64 },

    #[error("round limit of {max_rounds} exceeded while checking candidate size {k}")]
    RoundLimitExceeded {
        max_rounds: u64,
        k: usize,
        /// Everything recorded up to the point of failure.
        partial: Box<RunRecord>,
    },

    #[error("collection budget for k={k}, delta={delta} does not fit in 128 bits")]
    BudgetOverflow { k: usize, delta: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
