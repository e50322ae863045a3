use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported network size: {nodes} nodes (limit {limit})")]
    UnsupportedSize { nodes: usize, limit: usize },

    #[error("scenario would exceed the task cap of {cap}")]
    TaskCapExceeded { cap: usize },

    #[error("repair did not reach a feasible fleet within {additions} additions")]
    RepairFailure { additions: usize },

    #[error("archive is empty")]
    EmptyArchive,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
