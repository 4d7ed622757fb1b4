use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrand tail not negligible at t_max = {t_max} (tail value {tail:e})")]
    TailNotNegligible { t_max: f64, tail: f64 },

    #[error("weighted class integral diverges (alpha = {alpha}, r = {r})")]
    Divergent { alpha: f64, r: f64 },

    #[error("density mass {mass} deviates from 1 by more than 1e-6")]
    MassDeficit { mass: f64 },

    #[error("density value {value:e} at x = {x} is below the clamping floor")]
    NegativeDensity { x: f64, value: f64 },

    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(usize),

    #[error("pairwise oracle is limited to {limit} samples, got {n}")]
    TooManySamples { n: usize, limit: usize },

    #[error("kernel weight exp({exponent}) exceeds working precision; bandwidth too small for eta")]
    UnstableKernel { exponent: f64 },

    #[error("sample size {0} too small for this bandwidth rule")]
    SampleTooSmall(u64),

    #[error("boundary case (1-eta)/(2 eta) = 2 alpha is not covered by any regime")]
    DegenerateBoundary,

    #[error("iterate collapsed at step {step}: inner expression {inner} <= 0")]
    IterateCollapse { step: usize, inner: f64 },

    #[error("variance integrand not integrable for eta = {eta} (requires eta > 1/4)")]
    NonIntegrable { eta: f64 },

    #[error("asymptotic variance quadrature returned {0} < 0")]
    NegativeVariance(f64),

    #[error("rate regression needs at least 3 points with positive mse, got {0}")]
    InsufficientPoints(usize),

    #[error("malformed sample row {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::TooFewSamples(_)
            | Error::TooManySamples { .. }
            | Error::SampleTooSmall(_)
            | Error::InsufficientPoints(_)
            | Error::Json(_) => 2,
            Error::FileNotFound(_) | Error::Io(_) | Error::Csv(_) | Error::MalformedRow { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
