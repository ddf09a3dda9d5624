use thiserror::Error;

/// Errors produced by smoothing, certification and fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("k-nearest-neighbour bandwidth is zero at index {index} (tied sample values)")]
    ZeroBandwidth { index: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("backfitting did not converge after {iterations} iterations (last delta {last_delta:e})")]
    NonConvergence { iterations: usize, last_delta: f64 },

    #[error("linear system is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("query point ({u}, {v}) receives zero kernel mass")]
    ZeroKernelMass { u: f64, v: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
