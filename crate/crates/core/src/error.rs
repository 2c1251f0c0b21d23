use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported exponent p = {0}")]
    UnsupportedExponent(f64),

    #[error("degenerate weight at point {index}: density value {density} at that point")]
    DegenerateWeight { index: usize, density: f64 },

    #[error("root finder failed at t = {t}: residual {residual:e}")]
    SolverFailure { t: f64, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    #[error("numerical inconsistency: squared error {0:e} below tolerance")]
    NumericalInconsistency(f64),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
