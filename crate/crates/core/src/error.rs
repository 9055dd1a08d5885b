use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty set")]
    EmptySet,
    #[error("window exhausted: {0}")]
    WindowExhausted(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("not a cover neighborhood: {0}")]
    NotCoverNeighborhood(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("pattern mismatch")]
    PatternMismatch,
    #[error("source/range mismatch")]
    SourceRangeMismatch,
    #[error("oracle limit: {0} sites exceeds {1}")]
    OracleLimit(usize, usize),
    #[error("not perturbed periodic: {0}")]
    NotPerturbedPeriodic(String),
    #[error("not hermitian: max deviation {0:e}")]
    NotHermitian(f64),
    #[error("not gauge invariant")]
    NotGaugeInvariant,
    #[error("dimension {0} exceeds cap {1}")]
    DimensionCap(usize, usize),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

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
