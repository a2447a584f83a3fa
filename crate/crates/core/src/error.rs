use std::path::PathBuf;

use crate::model::CellId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("{file}: header declares {declared} {what}, found {found}")]
    CountMismatch {
        file: String,
        what: &'static str,
        declared: usize,
        found: usize,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cell {cell} ({width} x {height}) does not fit in the canvas")]
    CellLargerThanCanvas { cell: CellId, width: f64, height: f64 },

    #[error("smoothing coefficient gamma must be positive, got {0}")]
    NonPositiveGamma(f64),

    #[error("objective diverged: {value} exceeds {limit} after {retries} learning-rate retries")]
    DivergenceDetected {
        value: f64,
        limit: f64,
        retries: u32,
    },

    #[error("invalid netlist: {0}")]
    InvalidNetlist(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn parse(file: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.to_string(),
            line,
            message: message.into(),
        }
    }
}
