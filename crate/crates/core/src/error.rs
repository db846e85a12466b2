use thiserror::Error;

pub type Result<T> = std::result::Result<T, VrdError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VrdError {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid subsystem dims {dims:?} for matrix dimension {dim}")]
    InvalidDims { dims: Vec<usize>, dim: usize },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("parameter `{name}` = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid label `{0}`")]
    InvalidLabel(String),

    #[error("invalid quasi-channel: {0}")]
    InvalidQuasiChannel(String),

    #[error("incomplete Pauli dataset: missing setting {0}")]
    IncompleteDataset(String),

    #[error("invalid optical layout: {0}")]
    InvalidLayout(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Empty(&'static str),
}
