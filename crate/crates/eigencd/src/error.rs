use thiserror::Error;

/// Errors produced by graph ingestion, matrix construction and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("edge list contains no data lines")]
    EmptyGraph,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("shift {lambda} does not dominate diagonal entry {diag} at index {index}")]
    ShiftTooSmall {
        index: usize,
        diag: f64,
        lambda: f64,
    },

    #[error("expected a unit vector, got norm {norm}")]
    NotUnit { norm: f64 },

    #[error("spiked spectrum step {delta} outside (0, 1/(d-1)) for d = {dim}")]
    SpikedDeltaOutOfRange { delta: f64, dim: usize },

    #[error("eigenvalue probe too inaccurate: w'u = {value} <= sigma_lower/8 = {threshold}")]
    ProbeTooInaccurate { value: f64, threshold: f64 },

    #[error("iterate collapsed to the zero vector")]
    ZeroIterate,

    #[error("outer iteration cap {cap} exceeded; best shift so far {best_lambda}")]
    OuterIterationCap { cap: usize, best_lambda: f64 },

    #[error("initial vector lies in the null space (Aw = 0)")]
    NullspaceStart,

    #[error("x'Ax = {value} is not positive; CPM requires an aligned start on a PSD matrix")]
    NonPositiveQuadraticForm { value: f64 },

    #[error("reference eigenvalue did not converge to tolerance {tolerance}")]
    ReferenceNotConverged { tolerance: f64 },

    #[error("no trace records to emit")]
    EmptyTrace,

    #[error("dense oracle refuses dimension {dim} > {max}")]
    OracleTooLarge { dim: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
