use std::path::PathBuf;

use crate::model::{Dyad, NodeId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),

    #[error("group index {group} out of range for K = {k}")]
    GroupOutOfRange { group: usize, k: usize },

    #[error("dyad {0} is already instantiated")]
    DuplicateDyad(Dyad),

    #[error("dyad {0} is not instantiated")]
    UnknownDyad(Dyad),

    #[error("dyad {0} was observed present and cannot be flipped to absent")]
    RejectedFlip(Dyad),

    #[error("count underflow while removing dyad {0}")]
    CountUnderflow(Dyad),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("out-of-order interval {got}: tracker already at {current}")]
    OutOfOrder { got: u32, current: u32 },

    #[error("cut interval {tau} outside retained range [{first}, {last}]")]
    CutOutOfRange { tau: u32, first: u32, last: u32 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("enumeration budget exceeded: {configurations} configurations (limit {limit})")]
    BudgetExceeded { configurations: f64, limit: f64 },

    #[error("baseline log-likelihood is zero at interval {0}")]
    ZeroBaseline(u32),

    #[error("series misaligned: {0}")]
    Misaligned(String),

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
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data rather than bad configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::SelfLoop(_)
                | Error::DuplicateDyad(_)
                | Error::UnknownDyad(_)
                | Error::RejectedFlip(_)
                | Error::Parse { .. }
                | Error::Data(_)
                | Error::Io { .. }
                | Error::Json { .. }
                | Error::OutOfOrder { .. }
        )
    }
}
