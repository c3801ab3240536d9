use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input failed validation (bad dimensions, bad config values).
    #[error("validation error: {0}")]
    Validation(String),

    /// `h[row][col]` differs from `conj(h[col][row])` (1-based indices).
    #[error("matrix is not hermitian: |h[{row}][{col}] - conj(h[{col}][{row}])| = {deviation:.3e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    /// A state lies outside the domain of a saturation function or coordinate chart.
    #[error("domain error: {0}")]
    Domain(String),

    /// A derivative was requested where the saturation function is not differentiable.
    #[error("derivative domain error: {0}")]
    DerivativeDomain(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    /// Finite-difference estimate failed its self-consistency check.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
