use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("{function}: argument {x} outside the domain ({domain})")]
    Domain {
        function: &'static str,
        x: f64,
        domain: &'static str,
    },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("radius {rho} of layer {layer} is outside the admissible interval (0, {rho_max})")]
    Admissibility { layer: usize, rho: f64, rho_max: f64 },

    #[error("{what}: no convergence (achieved error estimate {estimate:e}, requested {requested:e})")]
    Numeric {
        what: String,
        estimate: f64,
        requested: f64,
    },

    #[error("minimization failed: {0}")]
    NonConvergence(String),

    #[error("table schema mismatch: {0}")]
    Schema(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput { .. } | Error::InvalidConfig(_) | Error::Schema(_) | Error::Admissibility { .. } => 2,
            Error::Domain { .. } | Error::UnsupportedRegime(_) | Error::Numeric { .. } | Error::NonConvergence(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
