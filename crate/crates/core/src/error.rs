use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode {path}: {message}")]
    Decode { path: PathBuf, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("negative pairwise penalty {penalty} on edge ({j}, {k})")]
    NonSubmodular { j: usize, k: usize, penalty: f64 },
    #[error("problem too large for exhaustive search: {0} variables (max 20)")]
    TooLarge(usize),
    #[error("linear solve failed: residual {residual:e} exceeds {tolerance:e}")]
    SolveFailure { residual: f64, tolerance: f64 },
    #[error("model expects global features of length {expected}, got {actual}")]
    ModelMismatch { expected: usize, actual: usize },
    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
