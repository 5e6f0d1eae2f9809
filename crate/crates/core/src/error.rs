use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("spheroid equations have no root (residuals: envelope {envelope:.3e}, mass {mass:.3e})")]
    SpheroidNoRoot { envelope: f64, mass: f64 },

    #[error("spheroid must be prolate (a = {a}, b = {b})")]
    NotProlate { a: f64, b: f64 },

    #[error("inertia matrix is singular")]
    SingularInertia,

    #[error("pitch angle {theta:.4} rad is too close to the gimbal singularity")]
    Gimbal { theta: f64 },

    #[error("negative propeller speed {n_p} rpm (reverse thrust is not modelled)")]
    ReverseThrust { n_p: f64 },

    #[error("simulation diverged at t = {t:.2} s: {reason}")]
    Diverged { t: f64, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("insufficient data: need at least {required} samples, got {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("quadratic program is infeasible")]
    Infeasible,

    #[error("invalid path: {0}")]
    Path(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data collection failed: {0}")]
    Collection(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}
