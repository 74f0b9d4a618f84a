use thiserror::Error;

/// Errors raised by the model, controller and harness layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("impedance certification failed at t = {time:.4} s: {reason} (eigenvalue {eigenvalue:.6e})")]
    Certification {
        time: f64,
        eigenvalue: f64,
        reason: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("simulation aborted at t = {time:.4} s: {reason}")]
    Simulation { time: f64, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Short machine-readable tag, used in the CLI's JSON error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Certification { .. } => "certification",
            Error::Config(_) => "config",
            Error::Simulation { .. } => "simulation",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
