use std::path::PathBuf;

use nehari_core::NehariError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration file not found: {}", .0.display())]
    ConfigNotFound(PathBuf),
    #[error("invalid configuration{}: `{key}`: {reason}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    ConfigInvalid {
        key: String,
        reason: String,
        line: Option<usize>,
    },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] NehariError),
    /// The command ran but its numerical contract does not hold.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for numerical failures, 2 for configuration and i/o errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 1,
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}
