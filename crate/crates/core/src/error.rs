use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("value outside the feasible domain: {0}")]
    Domain(String),

    #[error("solver failure: {message}")]
    Solver {
        message: String,
        /// Last feasible iterate reached before the failure.
        last_iterate: Vec<f64>,
    },

    #[error("solver failure in round {round}: {source}")]
    TrainingSolver {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("weak learner exhausted: every candidate stump is excluded")]
    WeakLearnerExhausted,

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("grid point {label}: {source}")]
    GridPoint {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for numeric failures (solver breakdown, non-finite values).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Solver { .. } | Error::TrainingSolver { .. } => true,
            Error::GridPoint { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    /// True for failures reading or writing files.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::GridPoint { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
