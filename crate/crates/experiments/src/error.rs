use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] memvisc::Error),

    #[error("solver failed at eps = {eps}: {source}")]
    Solver {
        eps: f64,
        #[source]
        source: memvisc::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("refusing to write a report with a non-finite value in {0}")]
    NonFinite(String),
}

pub type ExpResult<T> = std::result::Result<T, ExpError>;
