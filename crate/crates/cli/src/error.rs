use std::path::PathBuf;

use npmc_core::NpmcError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("replication {replication} (seed {seed}), method {method}: {source}")]
    Replication {
        replication: usize,
        seed: u64,
        method: String,
        #[source]
        source: NpmcError,
    },
    #[error("the problem is infeasible (maximized dual {dual_value} > 1)")]
    Infeasible { dual_value: f64 },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: NpmcError,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(key: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("`{key}`: {msg}"))
    }

    pub fn core(context: impl Into<String>, source: NpmcError) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for bad configuration or input, 3 for a failed
    /// replication, 4 for an infeasible training problem, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Core { .. } => 2,
            CliError::Replication { .. } => 3,
            CliError::Infeasible { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }
}
