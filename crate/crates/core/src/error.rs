use std::path::PathBuf;

/// Errors raised by the solvers, diagnostics and file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no L2 Gausson exists for lambda = {lambda}, omega = {omega}")]
    NoGausson { lambda: f64, omega: f64 },

    #[error("tau reached the singular threshold {tau:e} at t = {t}")]
    Singularity { t: f64, tau: f64 },

    #[error("tolerance not met: {what} (residual {residual:e}, tolerance {tolerance:e})")]
    ToleranceNotMet {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("Re a_{axis} = {re_a:e} <= 0 at t = {t}; reduce dt")]
    LossOfIntegrability { axis: usize, t: f64, re_a: f64 },

    #[error("non-finite values after {substep} substep of step {step}")]
    NumericalBlowup { step: usize, substep: &'static str },

    #[error("tau trajectory covers [{start}, {end}] but t = {t} was requested")]
    TrajectoryCoverage { t: f64, start: f64, end: f64 },

    #[error("resolution: {0}")]
    Resolution(String),

    #[error("densities carry different mass: {p} vs {q}")]
    MassMismatch { p: f64, q: f64 },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
