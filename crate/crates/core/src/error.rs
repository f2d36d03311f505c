use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:e})")]
    RootsNotConverged {
        iterations: usize,
        max_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("solver budget exceeded: degree {degree} > {limit}")]
    BudgetExceeded { degree: usize, limit: usize },

    #[error("point is not repelling (|lambda| = {modulus})")]
    NotRepelling { modulus: f64 },

    #[error("point {0} is not periodic within tolerance")]
    NotPeriodic(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no safe radius passes the acceptance tests")]
    NoSafeRadius { curve: Vec<(f64, f64, f64)> },

    #[error("evaluator is not entire: {0}")]
    NotEntire(String),

    #[error("samples escape the box (half-width {half_width}); enlarge it")]
    EnlargeBox { half_width: f64 },

    #[error("arc precondition failed: {0}")]
    Arc(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
