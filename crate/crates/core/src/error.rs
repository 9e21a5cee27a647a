use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grade {grade} out of range for dimension {dim}")]
    GradeOutOfRange { grade: usize, dim: usize },
    #[error("non-positive base for a real power")]
    NonPositiveBase,
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("vectors are linearly dependent")]
    DependentInput,
    #[error("singular lattice basis")]
    SingularBasis,
    #[error("point {0} outside the curve domain")]
    DomainError(String),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("undecidable at precision cap {cap} bits")]
    Indeterminate { cap: u32 },
    #[error("no decomposition case verified: {0}")]
    LemmaFailure(String),
    #[error("index overflow: {0}")]
    Overflow(String),
    #[error("degenerate regression grid: {0}")]
    DegenerateGrid(String),
    #[error("tolerance not reached: {0}")]
    ToleranceNotReached(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
