use thiserror::Error;

/// Errors surfaced by generation, estimation, ordering, pruning, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter violates a precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A numerical routine failed (singular solve, divergent quadrature, ...).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Input data violates an invariant (non-finite values, shape mismatch, ...).
    #[error("bad data: {0}")]
    Data(String),

    /// Score-model training failed.
    #[error("training failure: {0}")]
    Training(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
