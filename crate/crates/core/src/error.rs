use thiserror::Error;

/// Errors raised across density evolution, threshold search and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("no sign change of the fixed-point polynomial in (0, 0.5) for dv={dv}, k={k}")]
    NoRootInRange { dv: usize, k: usize },
    #[error("unsupported variable-node degree {dv} for this operation")]
    UnsupportedDegree { dv: usize },
    #[error("unsupported protection mode {0} for this operation")]
    UnsupportedMode(&'static str),
    #[error("LLR grid half-width {half_width} cannot hold channel LLR {llr}")]
    GridTooNarrow { half_width: f64, llr: f64 },
    #[error("densities live on different grids")]
    GridMismatch,
    #[error("threshold gain undefined for a zero uniform threshold")]
    ZeroBaseline,
    #[error("graph construction failed: {0}")]
    ConstructionFailed(String),
    #[error("alist parse error at line {line}: {msg}")]
    Alist { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
