use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("unknown protocol `{name}`; registry: {registry}")]
    UnknownProtocol { name: String, registry: String },
    #[error("cannot read config {path}: {reason}")]
    ConfigFile { path: PathBuf, reason: String },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] shuffle_dp::Error),
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

impl CliError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use shuffle_dp::Error as E;
        match self {
            CliError::Config { .. } | CliError::UnknownProtocol { .. } | CliError::ConfigFile { .. } => EXIT_CONFIG,
            CliError::Core(E::InvalidParameter { .. } | E::ModulusMismatch { .. }) => EXIT_CONFIG,
            CliError::Core(E::BudgetExceeded { .. }) => EXIT_BUDGET,
            CliError::Core(_) | CliError::Write { .. } | CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
