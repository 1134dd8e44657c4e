use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Input { path: String, source: rotcov::Error },

    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },

    #[error(transparent)]
    Library(#[from] rotcov::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rotcov::Error as E;
        match self {
            CliError::Usage(_) | CliError::Input { .. } => EXIT_USAGE,
            CliError::Output { .. } => EXIT_IO,
            CliError::Library(E::Solver(_)) => EXIT_SOLVER,
            CliError::Library(E::Io(_)) => EXIT_IO,
            CliError::Library(_) => EXIT_USAGE,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub type CliResult<T> = Result<T, CliError>;
