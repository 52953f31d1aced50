use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Json { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] regulus_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, e: &serde_json::Error) -> Self {
        CliError::Json { path: path.into(), line: e.line(), column: e.column(), message: e.to_string() }
    }

    /// Context for errors inside a named field of an input file.
    pub fn in_file(path: &std::path::Path, what: &str, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {what}: {e}", path.display()))
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
