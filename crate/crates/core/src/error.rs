//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Bessel order above the configured cap was requested.
    #[error("bessel order {requested} exceeds cap {cap}")]
    OrderCap { requested: usize, cap: usize },

    /// The phase-noise density is not a valid (nonnegative) density.
    #[error("model validity: {0}")]
    ModelValidity(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The detector requires a model family the scenario does not carry.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// The decision rule is defined for PSK alphabets only.
    #[error("unsupported constellation: {0}")]
    UnsupportedConstellation(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid symbol index {index} for constellation of size {size}")]
    InvalidSymbol { index: usize, size: usize },

    /// A genie-aided detector was asked to run on an observation whose
    /// truth record has been stripped.
    #[error("truth record missing from observation")]
    MissingTruth,

    /// Two independent evaluation routes disagreed beyond tolerance.
    #[error("self-check failed: {0}")]
    SelfCheck(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A caller violated a documented precondition (e.g. oracle validation
    /// outside its small-instance regime).
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric degeneracy: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
