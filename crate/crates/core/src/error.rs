//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A field contains NaN or infinite samples.
    #[error("invalid field: {0}")]
    InvalidField(String),

    /// A scalar argument violates an operation's hypothesis.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two fields or grids that must match do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The operation is not defined on this grid type.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A fixed-point iteration did not reach its tolerance.
    #[error("no convergence after {iterations} iterations (last distance {last_distance:.3e})")]
    NonConvergence {
        iterations: usize,
        last_distance: f64,
    },

    /// A time step produced a non-finite field.
    #[error("step rejected at t = {t}: field became non-finite")]
    StepRejected { t: f64 },

    /// A ledger-consuming operation received no samples.
    #[error("empty ledger")]
    EmptyLedger,

    /// A run configuration names an unknown or incomplete scenario.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Malformed checkpoint or config file.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
