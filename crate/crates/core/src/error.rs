use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input text; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty Hamiltonian: no terms with non-zero weight")]
    EmptyHamiltonian,

    /// An argument outside the operation's numeric domain.
    #[error("invalid argument `{name}`: {msg}")]
    Domain { name: &'static str, msg: String },

    #[error("no segment count up to {limit} satisfies the error target")]
    Overflow { limit: u64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            name,
            msg: msg.into(),
        }
    }
}

/// Rejects NaN, infinities and values `<= 0`.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, format!("must be finite and > 0, got {value}")))
    }
}
