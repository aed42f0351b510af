use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine could not reach the requested accuracy.
    #[error("accuracy error: requested {requested:e}, achieved estimate {achieved:e} ({context})")]
    Accuracy {
        requested: f64,
        achieved: f64,
        context: String,
    },

    /// Spatial vector length does not match the operator.
    #[error("shape error: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    /// The adaptive controller exceeded its retry budget on one step.
    #[error("adaptive step {step} did not converge after {retries} retries (last residual ratio {last_ratio:e}, trial step {last_step:e})")]
    NonConvergence {
        step: usize,
        retries: usize,
        last_ratio: f64,
        last_step: f64,
    },

    /// Data required by the operation is unavailable.
    #[error("state error: {0}")]
    State(String),

    /// The operation is not defined for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
