use thiserror::Error;

/// Errors for signal generation, linear algebra and detection operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("stream too short: {len} samples, need at least {need}")]
    StreamTooShort { len: usize, need: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("matrix not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),

    #[error("eigensolver failed to converge")]
    NoConvergence,

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(&'static str),

    #[error("degenerate score distribution: all {0} scores are identical")]
    DegenerateScores(usize),

    #[error("kernel kind {kind:?} not supported here: {reason}")]
    KernelNotAllowed {
        kind: &'static str,
        reason: &'static str,
    },

    #[error("cannot score a zero frame: {0}")]
    ZeroFrame(&'static str),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
