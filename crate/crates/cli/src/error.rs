use std::path::PathBuf;

use thiserror::Error;

/// Process exit status for a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Config = 2,
    Data = 3,
    Solver = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Config(_) | CliError::Io { .. } => Exit::Config,
            CliError::Data(_) => Exit::Data,
            CliError::Solver(_) => Exit::Solver,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<mangeron::Error> for CliError {
    fn from(e: mangeron::Error) -> Self {
        use mangeron::Error as E;
        match e {
            E::CornerMismatch { .. } | E::DataConstraints(_) => CliError::Data(e.to_string()),
            E::Singular { .. } => CliError::Solver(e.to_string()),
            E::InvalidInput(_) | E::Shape(_) | E::NotANode { .. } | E::Expression(_) => {
                CliError::Config(e.to_string())
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
