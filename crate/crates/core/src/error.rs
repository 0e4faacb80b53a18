use thiserror::Error;

/// Errors produced by the analysis engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} is out of range for a graph on {n} vertices")]
    InvalidVertex { vertex: usize, n: usize },

    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(usize, usize, &'static str),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("colouring is not proper: {0}")]
    ImproperColouring(String),

    #[error("search budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("no proper colouring exists")]
    EmptySolutionSpace,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("argument outside the domain of the formula: {0}")]
    Domain(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("at most {max} distinct colours are supported, found {found}")]
    TooManyColours { max: usize, found: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
