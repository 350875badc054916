use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid base matrix: {0}")]
    InvalidBase(String),
    #[error("missing offset for base entry ({row}, {col})")]
    MissingOffset { row: usize, col: usize },
    #[error("ensemble {ensemble} does not fit this base matrix: {reason}")]
    EnsembleMismatch { ensemble: String, reason: String },
    #[error("relay {relay} references packet {packet} which is not available yet")]
    ForwardReference { relay: usize, packet: usize },
    #[error("header bit {0} is outside the packet range")]
    HeaderRange(usize),
    #[error("differential coding needs a non-empty stream")]
    EmptyStream,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rank deficient matrix: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("density evolution diverged: {0}")]
    Divergence(String),
    #[error("alist parse error on line {line}: {msg}")]
    Alist { line: usize, msg: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
