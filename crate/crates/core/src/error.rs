use std::path::PathBuf;

use crate::svm::DualSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    /// The dual solver ran out of its iteration budget. The best feasible
    /// iterate is kept so callers can still inspect it.
    #[error("dual solver stopped after {iterations} pair updates with KKT violation {violation:.3e}")]
    Convergence {
        iterations: usize,
        violation: f64,
        best: Box<DualSolution>,
    },

    #[error("squared weight norm {weight_norm_sq:.3e} is too small; the margin is undefined")]
    DegenerateMargin { weight_norm_sq: f64 },

    #[error("C' = {c_prime} is not below C'_max = {c_prime_max}; the upper bound denominator is non-positive")]
    InfeasibleC { c_prime: f64, c_prime_max: f64 },

    #[error("singular bound parameters: 2 C' gamma^2 = 1 exactly")]
    SingularParameter,

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("{path}: row {row}: {message}")]
    MalformedRow {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach experiment context (fold, fraction, noise level) to an error
    /// without losing its kind.
    pub fn context(self, ctx: &str) -> Self {
        match self {
            Error::Validation(m) => Error::Validation(format!("{ctx}: {m}")),
            Error::Shape(m) => Error::Shape(format!("{ctx}: {m}")),
            Error::Invariant(m) => Error::Invariant(format!("{ctx}: {m}")),
            Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
            other => {
                log::debug!("{ctx}: {other}");
                other
            }
        }
    }
}
