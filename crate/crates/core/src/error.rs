use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("certificate violation: suboptimality {0} is below zero beyond rounding")]
    CertificateViolation(f64),

    #[error("no moment certificate: alpha = {alpha} is not below the tail index {index}")]
    NoCertificate { alpha: f64, index: f64 },

    #[error("run diverged at step {step}")]
    Diverged { step: usize },

    #[error("audit refused: {0}")]
    AuditRefused(String),

    #[error("empty input")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
