use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected {expected} entries, got {actual}")]
    InvalidLength { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("unsupported matrix size {dim} (maximum {max})")]
    UnsupportedSize { dim: usize, max: usize },

    #[error("eigenvalue iteration did not converge (relative residuals {residuals:?})")]
    NotConverged { residuals: Vec<f64> },

    #[error("matrix is not unitary (deviation {deviation:.3e} exceeds {tol:.1e})")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid qubit index {index} for a {qubits}-qubit register")]
    QubitIndex { index: usize, qubits: usize },

    #[error("unknown {kind} `{name}`; known: {known}")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid braid word: {0}")]
    InvalidBraid(String),

    #[error("{0}")]
    Unsupported(String),
}
