use thiserror::Error;

/// Errors produced by the simulation and estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("decode window starting at symbol {start} needs {width} symbols but only {available} are available")]
    Window {
        start: usize,
        width: usize,
        available: usize,
    },

    #[error("unphysical geometry: {0}")]
    Geometry(String),

    #[error("zero-norm input: {0}")]
    ZeroNorm(&'static str),

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
