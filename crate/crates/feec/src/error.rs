use std::path::PathBuf;

/// Errors of the command-line harness, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] feec_core::Error),
    #[error("{0} invariant check(s) failed")]
    Invariant(usize),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// 2 for invalid input, 3 for numerical failures, 4 for failed invariants, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        use feec_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Factorization(_) | E::Numerical(_) | E::Shift(_) | E::Cfl(_)) => 3,
            CliError::Core(_) => 2,
            CliError::Invariant(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
