use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("input points are not sorted by arrival time (index {0})")]
    Unsorted(usize),
    #[error("operation requires {expected} mode")]
    Mode { expected: &'static str },
    #[error("exploration exceeded the cap of {cap} cells from the start (cone escaped)")]
    ExplorationCap { cap: i64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
