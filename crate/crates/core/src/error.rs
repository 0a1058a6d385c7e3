//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiracError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("configuration violates rule `{rule}`: {detail}")]
    ConfigRule { rule: String, detail: String },

    #[error("grid too coarse: {0}")]
    Grid(String),

    #[error("operation requires m = 0 but mass is {mass}; the massive reduction to a convolution is unsupported (see mass_phase)")]
    MassiveConvolution { mass: f64 },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("numerical check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, DiracError>;
