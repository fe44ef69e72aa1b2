use thiserror::Error;

/// Errors raised by the geometry and dynamics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max |m - m^dag| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("trace is not one (trace = {trace})")]
    TraceNotOne { trace: f64 },

    #[error("negative eigenvalue {value:e}")]
    NegativeEigenvalue { value: f64 },

    #[error("derivative leaves the support of the state (kernel component {magnitude:e})")]
    UnsupportedDerivative { magnitude: f64 },

    #[error("family evaluation failed at {point:?}: {reason}")]
    EvaluationFailed { point: Vec<f64>, reason: String },

    #[error("metric has a negative eigenvalue {eigenvalue:e}")]
    NegativeDeterminant { eigenvalue: f64 },

    #[error("metric is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularMetric { min_eigenvalue: f64 },

    #[error("metric entry ({row}, {col}) has imaginary residue {residue:e}")]
    ImaginaryResidue { row: usize, col: usize, residue: f64 },

    #[error("time series needs at least {needed} samples, got {len}")]
    GridTooShort { len: usize, needed: usize },

    #[error("time grid is not strictly ascending at index {index}")]
    GridNotAscending { index: usize },

    #[error("step at t = {t} too large: half-step error estimate {estimate:e}")]
    StepTooLarge { t: f64, estimate: f64 },

    #[error("rate of channel {channel} is not finite at t = {t}")]
    PoleOnGrid { t: f64, channel: usize },

    #[error("Bloch vector outside the unit ball (|n|^2 = {norm_sq})")]
    OutsideBall { norm_sq: f64 },

    #[error("state at the pure boundary (|n| = {norm})")]
    PureBoundary { norm: f64 },

    #[error("rate pole at lambda*t = {lambda_t}")]
    Pole { lambda_t: f64 },

    #[error("empty series")]
    EmptySeries,

    #[error("channel decomposition mismatch at t = {t}: idf {idf:e} vs sum {sum:e}")]
    DecompositionMismatch { t: f64, idf: f64, sum: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
