use thiserror::Error;

/// Errors raised by state, swap, harness and classification operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// A chain left the rule's domain. `step` is 1-based; `states` holds
    /// every state visited before the failing move.
    #[error("chain error at step {step}: {reason}")]
    Chain {
        step: usize,
        reason: String,
        states: Vec<Vec<f64>>,
    },

    #[error("sampling error after {} states: {reason}", .states.len())]
    Sampling {
        reason: String,
        states: Vec<Vec<f64>>,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("vertical fit: log orbit has no finite slope")]
    VerticalFit,

    #[error("classification failure: {0}")]
    Classification(String),
}

impl Error {
    /// Whether the error stems from bad user input rather than a property
    /// of the rule under test.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_) | Error::Config(_) | Error::MalformedInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
