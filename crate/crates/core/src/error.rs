use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("capacity exceeded: {what} is {got}, cap is {cap}")]
    Capacity { what: &'static str, got: usize, cap: usize },

    #[error("mode error: {0}")]
    Mode(String),

    #[error("domain error: {name} = {value} outside [0, 1]")]
    Domain { name: &'static str, value: f64 },

    #[error("arity error: expected {expected} parameters, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },

    #[error("matrix B is entirely zero; nothing to project onto")]
    EmptyPencil,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("no convergence after {iterations} iterations in {routine}")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
