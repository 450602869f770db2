use thiserror::Error;

use crate::scalar::Precision;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{op}: mixed scalar configurations ({left} vs {right})")]
    Config {
        op: &'static str,
        left: Precision,
        right: Precision,
    },

    #[error("{0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(
        "power iteration did not reach tolerance in {sweeps} sweeps (last estimate {estimate:e})"
    )]
    SpectralNoConvergence { sweeps: usize, estimate: f64 },

    #[error("non-finite entries after {op}")]
    NonFinite { op: &'static str },

    #[error("convergence order needs three consecutive decreasing step norms")]
    InsufficientHistory,

    #[error("index search exceeded the matrix order {order}; rank tolerance is inconsistent")]
    IndexSearchExhausted { order: usize },

    #[error("matrix market: line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
