use thiserror::Error;

/// Errors raised by the solvers and their inputs.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are inconsistent with each other (shape, grid or mesh mismatch).
    #[error("usage error: {0}")]
    Usage(String),

    /// The marching scheme lost mass beyond the configured tolerance.
    #[error("instability at step {step}: mass drift {drift:.3e} exceeds {limit:.3e}")]
    Instability { step: usize, drift: f64, limit: f64 },

    /// No time horizon satisfies the contraction condition.
    #[error("no admissible horizon: {0}")]
    NoHorizon(String),

    /// Picard iterates stopped contracting.
    #[error("picard iteration diverging after {iterations} iterates (last distances {last:?})")]
    Divergence { iterations: usize, last: Vec<f64> },

    /// A quadrature or root search failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("configuration error:\n{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
