use thiserror::Error;

/// Errors raised by domain construction, spectra and the analysis harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the operation's admissible range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A domain or packing violates its structural invariants.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A mathematical precondition failed (zero denominator, constant field, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed a configured size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An iterative solver or integrator failed.
    #[error("solver failure: {0}")]
    Solver(String),

    /// A Weyl-type estimate cannot be formed from the supplied data.
    #[error("estimation error: {0}")]
    Estimation(String),

    /// The request is well formed but no supported method applies.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
