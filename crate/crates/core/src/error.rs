use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degree {degree} exceeds ambient dimension {max}")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("cannot contract a degree-0 form")]
    DegreeZero,
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("inclusion is rank deficient: rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("form is not of pure type ({p},{q}); residual {residual:e}")]
    ImpureType { p: usize, q: usize, residual: f64 },
    #[error("not a Calabi-Yau structure: {0}")]
    NotCalabiYau(String),
    #[error("subtorus is not special Lagrangian: {0}")]
    NotSpecialLagrangian(String),
    #[error("zero covector")]
    ZeroCovector,
    #[error("unsupported degree {0}")]
    UnsupportedDegree(usize),
    #[error("inconsistent structure: {0}")]
    Inconsistent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
