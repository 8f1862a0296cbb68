use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("gauge is not positive at t = {at}")]
    NonPositiveGauge { at: f64 },

    #[error("partition exceeded the budget of {cap} cells")]
    PartitionBudgetExceeded { cap: usize },

    #[error("integrand is undefined at x = {at:?}")]
    EvaluationError { at: Vec<f64> },

    #[error("tolerance {tol:e} not met: error estimate {error_estimate:e} after {evaluations} evaluations")]
    ToleranceNotMet {
        value: f64,
        error_estimate: f64,
        tol: f64,
        evaluations: usize,
    },

    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("operands use different tail families")]
    TailFamilyMismatch,

    #[error("factor {index} lies beyond the resolved range {resolved_up_to} but is not the default tail interval")]
    UnresolvedTail { index: usize, resolved_up_to: usize },

    #[error("factor {index} is unbounded; its normalized length diverges")]
    UnboundedFactor { index: usize },

    #[error("a bound on the integral of |f| is required for conditionally integrable integrands")]
    MissingAbsoluteBound,

    #[error("sequence is not Cauchy after {terms} terms ({pattern})")]
    NotCauchy {
        terms: usize,
        pattern: String,
        partials: Vec<f64>,
    },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
