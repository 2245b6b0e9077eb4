use crate::spectral::Mode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficients are not Hermitian-symmetric at mode {mode:?} (defect {defect:e})")]
    NotHermitian { mode: Mode, defect: f64 },

    #[error("cutoff {cutoff} exceeds the capacity of a {grid}-point grid (need grid >= 2N+1)")]
    GridTooSmall { cutoff: u32, grid: usize },

    #[error("a {grid}-point grid cannot hold this product alias-free (need at least {required})")]
    InsufficientPadding { grid: usize, required: usize },

    #[error("field cutoffs differ: {left} vs {right}")]
    BoxMismatch { left: u32, right: u32 },

    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("mode {0:?} lies outside the frequency box")]
    ModeOutsideBox(Mode),

    #[error("unsupported norm: {0}")]
    UnsupportedNorm(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cutoff {requested} exceeds the sampled cutoff {available}")]
    CutoffExceedsDraw { requested: u32, available: u32 },

    #[error("root finder failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("time grid: {0}")]
    TimeGrid(String),

    #[error("solution left the admissible range at t = {time} ({reason})")]
    Blowup { time: f64, reason: String },

    #[error("malformed field dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
