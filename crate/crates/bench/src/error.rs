use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] hyperinv::error::Error),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl BenchError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        use hyperinv::error::Error as E;
        match self {
            BenchError::Core(e) => match e {
                E::Shape { .. } => "shape",
                E::Config { .. } => "config",
                E::InvalidInput(_) => "invalid-input",
                E::Degenerate(_) => "degenerate",
                E::NonFinite { .. } => "non-finite",
                E::Parse { .. } => "parse",
                E::Io(_) => "io",
                _ => "numerical",
            },
            BenchError::File { .. } | BenchError::Io(_) => "io",
            BenchError::Csv(_) => "csv",
            BenchError::Json(_) => "json",
            BenchError::Config(_) => "config",
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
