use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance is missing data required by this formulation: {0}")]
    MissingPayload(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("MPS line {line}: {message}")]
    Mps { line: usize, message: String },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("solution error: {0}")]
    Solution(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}
