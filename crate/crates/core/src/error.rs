//! Crate-wide error type and `Result` alias.

use thiserror::Error;

/// Errors for validation and spectral computations.
///
/// Validation errors always report the measured deviation alongside the
/// tolerance that was applied, so a caller can tell roundoff from garbage.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("not Hermitian: |M - M†| = {deviation:.3e} exceeds tolerance {tolerance:.1e}")]
    NonHermitian { deviation: f64, tolerance: f64 },

    #[error(
        "not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} below -{tolerance:.1e}"
    )]
    NotPositive { min_eigenvalue: f64, tolerance: f64 },

    #[error("trace deviates from 1 by {deviation:.3e} (tolerance {tolerance:.1e})")]
    TraceDeviation { deviation: f64, tolerance: f64 },

    #[error("not unitary: |U†U - I| = {deviation:.3e} exceeds tolerance {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("negative probability {value:.3e} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("probabilities sum to {sum} (expected 1 within {tolerance:.1e})")]
    ProbabilityNotNormalized { sum: f64, tolerance: f64 },

    #[error("eigendecomposition failed to converge (dim {dim})")]
    ConvergenceFailure { dim: usize },

    #[error("matrix is numerically singular: min eigenvalue {min_eigenvalue:.3e}")]
    Singular { min_eigenvalue: f64 },

    #[error("projector {index} is not idempotent: |P² - P| = {deviation:.3e}")]
    NotIdempotent { index: usize, deviation: f64 },

    #[error("projectors {first} and {second} are not orthogonal: |P_m P_n| = {deviation:.3e}")]
    NotOrthogonal {
        first: usize,
        second: usize,
        deviation: f64,
    },

    #[error("operators do not sum to identity: |Σ - I| = {deviation:.3e}")]
    Incomplete { deviation: f64 },

    #[error("element {index} is not Hermitian: |E - E†| = {deviation:.3e}")]
    ElementNonHermitian { index: usize, deviation: f64 },

    #[error("element {index} is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    ElementNotPositive { index: usize, min_eigenvalue: f64 },

    #[error("projector {index} has non-integer rank: trace {trace}")]
    NonIntegerRank { index: usize, trace: f64 },

    #[error("block sizes sum to {total}, expected {dim}")]
    SizeMismatch { total: usize, dim: usize },

    #[error("invalid partition: {reason}")]
    InvalidPartition { reason: String },

    #[error("no block of rank ≥ 2 to refine")]
    NothingToRefine,

    #[error("block weights sum to {total:.3e}; closest free state undefined")]
    DegenerateNormalization { total: f64 },

    #[error("empty operator list")]
    Empty,

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
