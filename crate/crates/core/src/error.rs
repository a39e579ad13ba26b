use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    /// The Gram matrix of a channel draw is numerically singular. Callers in
    /// Monte Carlo loops reject the draw and resample.
    #[error("singular Gram matrix (condition estimate {condition:e})")]
    SingularGram { condition: f64 },

    #[error("large-scale coefficient of user {user} must be positive, got {value}")]
    NonPositiveBeta { user: usize, value: f64 },

    #[error("invalid broadcast slot {slot} for {users} users (expected 1..={max})", max = users.saturating_sub(1))]
    InvalidSlot { slot: usize, users: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
