use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Gram-Schmidt residual collapsed while orthogonalizing the given degree.
    #[error("degenerate basis: residual vanished at degree {degree}")]
    DegenerateBasis { degree: usize },

    #[error("no nonnegative quadrature rule found up to N = {max_n}")]
    NoStableRule { max_n: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("solution diverged in element {element} at t = {time} ({context})")]
    Divergence {
        element: usize,
        time: f64,
        context: String,
    },

    #[error("reference solution failed: {0}")]
    ReferenceSolution(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergence { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
