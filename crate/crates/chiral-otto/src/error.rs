use std::path::PathBuf;

use chiral_otto_core::Error as CoreError;

/// Failure of a command, carrying the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parameter(_) | CliError::Io { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::Core(e) if is_parameter_error(e) => 2,
            CliError::Core(_) => 4,
        }
    }
}

pub fn is_parameter_error(e: &CoreError) -> bool {
    matches!(e, CoreError::InvalidParameter(_) | CoreError::Sites(_) | CoreError::Dimension { .. })
}

pub type Result<T> = std::result::Result<T, CliError>;
