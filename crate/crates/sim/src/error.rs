use std::path::{Path, PathBuf};

/// Failures of the scenario runner, grouped by CLI exit code.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Validation(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io { path: path.to_path_buf(), source }
    }

    /// 1 validation, 2 solver failure, 3 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            SimError::Validation(_) => 1,
            SimError::Solver(_) => 2,
            SimError::Io { .. } => 3,
        }
    }
}

pub type SimResult<T> = Result<T, SimError>;
