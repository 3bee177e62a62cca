use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("integer overflow composing word at length {word_len}")]
    Overflow { word_len: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("observable must be real (Hermitian coefficients)")]
    NotReal,
    #[error("observable must have zero mean, got mean {0}")]
    NonZeroMean(f64),
    #[error("fixed-point system is singular: det(M_w - I) = 0")]
    SingularFixedPointSystem,
    #[error("correlation recursion capped at level {level} before pruning")]
    InexactRecursion { level: usize },
    #[error("combinatorial budget exceeded: {words} words > budget {budget}")]
    BudgetExceeded { words: u128, budget: u128 },
}
