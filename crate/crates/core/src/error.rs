use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid template: {0}")]
    InvalidTemplate(String),
    #[error("parameter {index} = {value} outside bounds [{lo}, {hi}]")]
    OutOfBounds { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("degenerate mesh: total surface area is zero")]
    DegenerateMesh,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("position at radius {radius} m is inside the central body (R = {body_radius} m)")]
    BelowSurface { radius: f64, body_radius: f64 },
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("non-finite value at step {step}: {what}")]
    NonFinite { step: usize, what: String },
    #[error("training diverged at step {step}: loss = {loss}")]
    TrainingDiverged { step: usize, loss: f64 },
    #[error("proxy file mismatch: {0}")]
    ProxyMismatch(String),
    #[error("force model is not differentiable: {0}")]
    NotDifferentiable(&'static str),
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable identifier, used in CLI error reports and FFI codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::InvalidTemplate(_) => "invalid_template",
            Error::OutOfBounds { .. } => "out_of_bounds",
            Error::DegenerateMesh => "degenerate_mesh",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::BelowSurface { .. } => "below_surface",
            Error::Singular(_) => "singular",
            Error::NonFinite { .. } => "non_finite",
            Error::TrainingDiverged { .. } => "training_diverged",
            Error::ProxyMismatch(_) => "proxy_mismatch",
            Error::NotDifferentiable(_) => "not_differentiable",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { what, expected, got })
    }
}
