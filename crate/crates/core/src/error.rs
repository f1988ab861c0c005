use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size limit exceeded: {what} = {count} > cap {cap}")]
    SizeLimit { what: String, count: String, cap: u64 },

    #[error("eigen solver did not converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("nnls did not converge within {iterations} iterations (residual norm {residual_norm:e})")]
    NnlsNoConvergence {
        iterations: usize,
        residual_norm: f64,
        best: Vec<f64>,
    },

    #[error("quadrature construction failed: exactness residual {residual:e} > tolerance {tolerance:e}")]
    ConstructionFailed { residual: f64, tolerance: f64 },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("cannot embed with negative quadrature weights (min weight {min_weight:e}); use approx_kernel instead")]
    UnsupportedEmbedding { min_weight: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
