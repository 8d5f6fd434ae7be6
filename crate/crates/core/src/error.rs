use thiserror::Error;

/// Errors raised by the exact-arithmetic and diagram layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field specification: {0}")]
    InvalidField(String),
    #[error("p = 2 is not supported: every construction here assumes p > 2")]
    EvenPrime,
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("elements belong to different field contexts")]
    ContextMismatch,
    #[error("negative valuation: {0}")]
    NegativeValuation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("axiom check failed: {0}")]
    AxiomFailure(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("resource limit: {0}")]
    Limit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
