use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a type invariant (non-finite values, bad grid, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation was called outside the parameter range it is defined on.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Not enough samples (snapshots, rows) to evaluate a quantity.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The velocity field became non-finite or exceeded the blow-up ceiling.
    #[error("blow-up at step {step} (last valid time {last_valid_time}): {reason}")]
    BlowUp {
        step: usize,
        last_valid_time: f64,
        reason: String,
    },

    /// Malformed snapshot, config or CSV input.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
