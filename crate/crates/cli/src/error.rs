use std::path::Path;

/// Command failures, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> CliError {
        CliError::Input(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> CliError {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

impl From<jigsaw_rl::Error> for CliError {
    fn from(e: jigsaw_rl::Error) -> CliError {
        match e {
            jigsaw_rl::Error::Parameter(msg) => CliError::Usage(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}
