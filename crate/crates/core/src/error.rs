use thiserror::Error;

/// Errors raised by the test constructions and evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid test specification: {0}")]
    Spec(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("observation {x} is outside the support of the {model} model")]
    Domain { model: &'static str, x: f64 },

    #[error("all densities are zero, the posterior is undefined")]
    UndefinedState,

    #[error("invalid lattice policy: {0}")]
    InvalidPolicy(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("optimizer: {0}")]
    Optimizer(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
