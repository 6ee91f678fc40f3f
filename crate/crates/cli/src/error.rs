use std::path::PathBuf;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lssal::Error),
    #[error("no prediction for {}", .0.display())]
    MissingPrediction(PathBuf),
    #[error("{failed} of {total} records failed")]
    Partial { failed: usize, total: usize },
}

impl CliError {
    /// 1 for I/O trouble on individual records, 2 for bad arguments or data.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(lssal::Error::Io { .. } | lssal::Error::Decode { .. }) => 1,
            CliError::Partial { .. } => 1,
            _ => 2,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Core(lssal::Error::InvalidArgument(msg.into()))
}

pub(crate) fn io_err(path: impl Into<PathBuf>, source: std::io::Error) -> CliError {
    CliError::Core(lssal::Error::Io {
        path: path.into(),
        source,
    })
}
