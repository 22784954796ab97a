use thiserror::Error;

use crate::report::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("requested {requested} entries exceeds capacity of {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line search failed: {0}")]
    LinesearchFailed(String),

    #[error("curvature condition failed: <delta, y> = {0:e}")]
    Curvature(f64),

    #[error("search direction lies in the null space of the operator")]
    DegenerateDirection,

    #[error("ADMM breakdown: {0}")]
    Breakdown(String),

    #[error("Newton breakdown at outer iteration {iteration}: {source}")]
    NewtonBreakdown {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A solver failed part-way; the iterates computed so far are kept.
    #[error("solver aborted after {} iterations: {cause}", partial.iterations)]
    Aborted {
        cause: Box<Error>,
        partial: Box<SolveReport>,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// The underlying cause, looking through [`Error::Aborted`] and
    /// [`Error::NewtonBreakdown`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Aborted { cause, .. } => cause.root(),
            Error::NewtonBreakdown { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn partial_report(&self) -> Option<&SolveReport> {
        match self {
            Error::Aborted { partial, .. } => Some(partial),
            _ => None,
        }
    }
}
