use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin quantum number `{0}`: 2j must be a non-negative integer")]
    InvalidSpin(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix is not symmetric: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("full tensor construction is limited to j <= {max}, got j = {j}")]
    SpinTooLarge { j: f64, max: f64 },

    #[error("gradient is singular at the phase-space boundary p = {p}")]
    SingularBoundary { p: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("detector did not converge: {0}")]
    Unconverged(String),
}
