use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A deterministic prediction was contradicted by the realized label.
    #[error("infinite loss: predicted q1 = {q1} but label {label} was realized")]
    InfiniteLoss { q1: f64, label: u8 },

    #[error(
        "distribution is not {sigma}-smooth at context {index}: mass {mass} exceeds cap {cap}"
    )]
    NotSmooth {
        index: usize,
        mass: f64,
        cap: f64,
        sigma: f64,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("insufficient points for fit: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("numerical assertion failed: {0}")]
    NumericalAssertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
