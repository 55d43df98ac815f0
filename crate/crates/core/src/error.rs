use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("instance too large: {what} ({size} > {limit})")]
    TooLarge { what: &'static str, size: f64, limit: f64 },
    #[error("empty expert class")]
    EmptyClass,
    #[error("unknown context id {0}")]
    UnknownContext(usize),
    #[error("context tree is inconsistent with the availability rule at round {round}")]
    InconsistentContexts { round: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("divergent integral in term `{0}`")]
    Divergent(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("incompatible strategy and adversary: {0}")]
    Incompatible(String),
    #[error("csv error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
