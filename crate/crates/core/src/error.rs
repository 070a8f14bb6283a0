use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A caller broke an operation's precondition. This indicates a bug, not
    /// a sampling event.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Sampler and constraint family cannot be paired.
    #[error("configuration error: {0}")]
    Config(String),

    /// An exact computation was refused because the instance is too large.
    #[error("instance too large: {what} is {actual}, limit is {limit}")]
    TooLarge { what: &'static str, actual: usize, limit: usize },

    /// A conditioning event has zero probability.
    #[error("conditioning event has zero probability")]
    ZeroProbabilityEvent,

    /// A transition matrix is not reversible with respect to its target.
    #[error("transition matrix not reversible: residual {residual:e} at ({row}, {col})")]
    NotReversible { residual: f64, row: usize, col: usize },

    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
