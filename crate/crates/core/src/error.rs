use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (jitter ladder exhausted at {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },
    #[error("adaptive quadrature exceeded maximum depth {0}")]
    MaxDepthExceeded(usize),
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),
    #[error("exact quantized Fisher information needs K <= 2, got K = {0}")]
    DimensionTooLarge(usize),
    #[error("outcome probabilities sum to {0}, expected 1")]
    NormalizationFailure(f64),
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
