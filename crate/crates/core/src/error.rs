use thiserror::Error;

use crate::mixture::Family;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("family mismatch: expected {expected}, found {found}")]
    FamilyMismatch { expected: Family, found: Family },

    #[error("delta {delta} is incompatible with theta_h_hat {theta_h_hat}: both alternatives fall outside (0, 1)")]
    DeltaIncompatible { theta_h_hat: f64, delta: f64 },

    #[error("unsupported method `{0}`: only np, mix, sam and pp are implemented (the commensurate prior is a non-goal of this tool)")]
    UnsupportedMethod(String),

    #[error("invalid method `{kind}`: {reason}")]
    InvalidMethod { kind: String, reason: String },

    #[error("invalid scenario `{label}`: {reason}")]
    InvalidScenario { label: String, reason: String },

    #[error("lineage mismatch: {0}")]
    LineageMismatch(String),

    #[error("{message} (at `{path}`)")]
    Config { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Location of the offending field for configuration errors, `None` otherwise.
    pub fn field_path(&self) -> Option<&str> {
        match self {
            Error::Config { path, .. } => Some(path),
            _ => None,
        }
    }
}
