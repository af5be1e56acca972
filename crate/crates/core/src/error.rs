use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Error)]
pub enum DsmError {
    #[error("{func}: argument out of domain ({detail})")]
    Domain { func: &'static str, detail: String },

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("{func}: result overflows f64 at order {order}, z = {z}")]
    Overflow { func: &'static str, order: usize, z: f64 },

    #[error("max_mode {max_mode} aliases with {samples} samples (need max_mode <= N/2 - 1)")]
    Aliasing { max_mode: usize, samples: usize },

    #[error("radius mismatch: {left} vs {right}")]
    RadiusMismatch { left: f64, right: f64 },

    #[error("unsupported background: {0}")]
    UnsupportedBackground(String),

    #[error("invalid configuration at `{path}`: {detail}")]
    Config { path: String, detail: String },

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("data layout mismatch: {0}")]
    Layout(String),

    #[error("malformed trace file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl DsmError {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        DsmError::Domain {
            func,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, detail: impl Into<String>) -> Self {
        DsmError::Config {
            path: path.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, DsmError>;
