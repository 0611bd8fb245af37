use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An approximate `k` could not decide a floor or ceiling within its
    /// precision budget.
    #[error("precision exhausted after {digits} digits; the enclosure straddles an integer")]
    PrecisionExhausted { digits: u32 },

    #[error("unsupported representation: {0}")]
    UnsupportedRepresentation(&'static str),

    #[error("invalid k: {0}")]
    InvalidK(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("node count exceeds the limit of {limit}")]
    SizeLimit { limit: u64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("closed form did not produce an integer: {0}")]
    NonIntegerResult(String),

    #[error("child {index} does not exist for an indicator in the floor-range")]
    ChildAbsent { index: u64 },
}

impl Error {
    /// Short stable identifier, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::PrecisionExhausted { .. } => "precision_exhausted",
            Error::UnsupportedRepresentation(_) => "unsupported_representation",
            Error::InvalidK(_) => "invalid_k",
            Error::Parse(_) => "parse",
            Error::SizeLimit { .. } => "size_limit",
            Error::InvalidParams(_) => "invalid_params",
            Error::NonIntegerResult(_) => "non_integer_result",
            Error::ChildAbsent { .. } => "child_absent",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
