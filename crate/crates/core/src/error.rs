use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UotError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("plan infeasible: column {column} has {count} entries above tolerance (limit {limit})")]
    Infeasible {
        column: usize,
        count: usize,
        limit: usize,
    },
    #[error("duality certificate unavailable: {0}")]
    CertificateUnavailable(String),
}

impl UotError {
    pub fn input(msg: impl Into<String>) -> Self {
        UotError::Input(msg.into())
    }

    pub fn dimension(msg: impl Into<String>) -> Self {
        UotError::Dimension(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        UotError::Numerical(msg.into())
    }

    /// True for failures caused by floating-point breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, UotError::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, UotError>;
