use thiserror::Error;

/// Errors raised by the numerical kernels and the certification machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix `{what}` is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { what: String, min_eigenvalue: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid genie: {0}")]
    InvalidGenie(String),

    #[error("no valid genie: cross-covariance a = {a} exceeds 1/2")]
    NoValidGenie { a: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn not_pd(what: impl Into<String>, min_eigenvalue: f64) -> Self {
        Error::NotPositiveDefinite {
            what: what.into(),
            min_eigenvalue,
        }
    }
}
