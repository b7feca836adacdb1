use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid pole specification: {0}")]
    InvalidPoles(String),
    #[error("observability matrix is numerically singular (condition {condition:.3e} exceeds cap {cap:.1e})")]
    ObservabilityDeficient { condition: f64, cap: f64 },
    #[error("pole placement failed: eigenvalue mismatch {mismatch:.3e} exceeds tolerance {tolerance:.3e}")]
    PlacementFailed { mismatch: f64, tolerance: f64 },
    #[error("eigensolver did not converge")]
    EigenSolve,
    #[error("divergence guard tripped at sweep {sweep}, x-node {node}: state norm {norm:.3e}")]
    NonFiniteState { sweep: usize, node: usize, norm: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
