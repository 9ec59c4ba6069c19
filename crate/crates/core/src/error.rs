use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite component at position {index}")]
    NonFinite { index: usize },

    #[error("invalid constraint set: {0}")]
    InvalidSet(String),

    #[error("invalid constraint family: {0}")]
    InvalidFamily(String),

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("constraint index {index} out of range for a family of {m} sets")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("invalid string plan: {0}")]
    InvalidPlan(String),

    #[error("plan violates bounds: {0}")]
    PlanBounds(String),

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("objective is value-only; use a derivative-free direction source")]
    NoSubgradient,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "nonascent search exhausted {trials} step sizes at outer iteration {k}, \
         perturbation {n} (last step index {ell})"
    )]
    StepBudgetExceeded {
        k: usize,
        n: usize,
        ell: i64,
        trials: usize,
    },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("trace is missing objective values")]
    MissingObjective,
}

pub type Result<T> = std::result::Result<T, Error>;
