//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A non-finite value was produced where one is not allowed.
    #[error("non-finite value in {context} at t = {t}")]
    NonFinite { context: String, t: f64 },

    /// An iterative solver failed to reach its tolerance.
    #[error("{solver} did not converge: {detail}")]
    Convergence { solver: String, detail: String },

    /// A constrained design problem has no feasible solution.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn convergence(solver: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Convergence {
            solver: solver.into(),
            detail: detail.into(),
        }
    }
}
