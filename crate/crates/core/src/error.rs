use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("lambda would appear in a denominator")]
    LambdaInDenominator,
    #[error("quotient is not representable in this coefficient ring")]
    NotRepresentable,
    #[error("coefficient ring mismatch")]
    RingMismatch,
    #[error("square-root witness for f{0} is required but missing")]
    MissingSqrtWitness(usize),
    #[error("indices must differ (got {0} and {0})")]
    EqualIndices(usize),
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("element is not homogeneous")]
    NonHomogeneous,
    #[error("image escapes the codomain window: {0}")]
    TruncationOverflow(String),
    #[error("unsupported coefficient: {0}")]
    UnsupportedCoefficient(String),
    #[error("{0} is not a derivation")]
    NotADerivation(String),
    #[error("{0}")]
    Range(String),
    #[error("invalid pencil data: {0}")]
    InvalidPencil(String),
}

pub type Result<T> = std::result::Result<T, Error>;
