use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid override `{key}`: {reason}")]
    Override { key: String, reason: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("result table: {0}")]
    Table(String),
    #[error(transparent)]
    Model(#[from] byztree::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// Process exit status: 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Override { .. } | CliError::Parse { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
