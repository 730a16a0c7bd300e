use std::path::{Path, PathBuf};

use asymboost::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {}: {source}", path.display())]
    Input { path: PathBuf, source: Error },

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn input(path: &Path, source: Error) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn missing(flag: &str) -> Self {
        CliError::Usage(format!("--{flag} is required (flag or config key)"))
    }

    /// 2 numeric or solver failure, 3 usage, configuration or input, 4 output I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 3,
            CliError::Output { .. } => 4,
            CliError::Core(e) => core_code(e),
        }
    }
}

fn core_code(e: &Error) -> i32 {
    match e {
        Error::Solver { .. }
        | Error::TrainingSolver { .. }
        | Error::Domain(_)
        | Error::WeakLearnerExhausted => 2,
        Error::GridPoint { source, .. } => core_code(source),
        Error::Io(_) => 4,
        _ => 3,
    }
}
