use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("opinion profile is not ordered at index {index}: {left} > {right}")]
    Unordered { index: usize, left: f64, right: f64 },

    #[error("invalid peer set for agent {agent}: {reason}")]
    InvalidWindow { agent: usize, reason: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("best-response iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("eigensolver could not certify the spectrum to {0:e}")]
    ToleranceFailure(f64),

    #[error("no consensus-time bound: |lambda_2| = {0} is not below 1")]
    NoBound(f64),

    #[error("trajectory reached its horizon without settling (last change {0:e})")]
    Unterminated(f64),

    #[error("target variance {target} is not attainable for n = {n}")]
    UnattainableVariance { target: f64, n: usize },

    #[error("bimodal blocks do not fit: {0}")]
    Overlap(String),

    #[error("instance too large: n = {n} exceeds the limit of {limit}")]
    SizeLimit { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
