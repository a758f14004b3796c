use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid time schedule: {0}")]
    InvalidTimes(String),

    #[error("step size {dt:e} s exceeds the stability bound (dt * spectral radius = {product:.3} > {limit})")]
    StepSize { dt: f64, product: f64, limit: f64 },

    #[error("integration became unstable at t = {t:e} s: {reason}")]
    Unstable { t: f64, reason: String },

    #[error("missing probe in kernel set: {0}")]
    MissingProbe(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical integration itself, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::StepSize { .. } | Error::Unstable { .. })
    }
}
