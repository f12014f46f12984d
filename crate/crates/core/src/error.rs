use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical routine failed (non-convergence, loss of rank).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A quantity left the representable floating-point range.
    #[error("value out of range: {0}")]
    Range(String),

    /// The horseshoe parameters cannot produce a construction.
    #[error("construction infeasible: {0}")]
    Infeasible(String),

    /// A rectangle image failed one of the crossing inequalities.
    #[error("geometric failure: {inequality} (log margin {margin:.6e})")]
    Geometric { inequality: String, margin: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn num(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit status used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_) | Error::Json(_) | Error::Io(_) => 2,
            Error::Numerical(_) | Error::Range(_) => 3,
            Error::Infeasible(_) | Error::Geometric { .. } => 4,
        }
    }
}
