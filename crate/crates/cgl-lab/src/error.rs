//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CglError {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("field/grid mismatch: field has {field_len} samples, grid has {grid_len} nodes")]
    LengthMismatch { field_len: usize, grid_len: usize },

    #[error("non-finite value at node {index} (r = {radius})")]
    NonFinite { index: usize, radius: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "no epsilon in the search grid certifies the bound: best was eps = {best_eps} \
         with max I_eps = {best_i_eps} > target {target}"
    )]
    NoEpsilon {
        best_eps: f64,
        best_i_eps: f64,
        target: f64,
    },

    #[error("step size collapsed below dt_min = {dt_min} at t = {t} without sustained growth")]
    StepSizeCollapse { t: f64, dt_min: f64 },

    #[error("too few samples for {what}: have {have}, need at least {need}")]
    TooFewSamples {
        what: &'static str,
        have: usize,
        need: usize,
    },

    #[error("dense recording required for {0}: rerun with record_every = 1")]
    DenseRecordingRequired(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, CglError>;

impl CglError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CglError::Io { path, source }
    }
}
