use thiserror::Error;

/// Errors surfaced by the simulation, optimization and persistence layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite amplitudes after propagation")]
    NonFinite,
    #[error("control length {got} does not match n_t = {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("control value {value} of parameter {param} at step {step} outside [{min}, {max}]")]
    BoundViolation {
        param: usize,
        step: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("control endpoint of parameter {param} is {got}, expected {expected}")]
    EndpointViolation { param: usize, expected: f64, got: f64 },
    #[error("stationary-state solver did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("archive: {0}")]
    Archive(String),
    #[error("archive checksum mismatch")]
    Checksum,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
