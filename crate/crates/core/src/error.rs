use thiserror::Error;

/// Errors raised by the numerical and geometric routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("composition error: {0}")]
    Composition(String),

    #[error("fake curvature residual {residual:.3e} exceeds tolerance {tolerance:.1e} at {at:?}")]
    FakeCurvature {
        residual: f64,
        tolerance: f64,
        at: Vec<f64>,
    },

    #[error("target matching residual {residual:.3e} exceeds hard limit {limit:.1e}")]
    TargetMatching { residual: f64, limit: f64 },

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn composition(msg: impl Into<String>) -> Self {
        Error::Composition(msg.into())
    }

    pub fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
