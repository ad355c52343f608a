use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `Config` and `Gate` map onto distinct CLI exit codes; everything else is a
/// usage or numerical-domain failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A hypothesis gate (exponent relation or weight class) failed.
    #[error("hypothesis gate failed ({hypothesis}): {detail}")]
    Gate { hypothesis: String, detail: String },

    #[error("kernel is not mean-zero on the sphere (cancellation defect {defect:e})")]
    NonCancelling { defect: f64 },

    #[error("ball family yields no admissible balls")]
    EmptyFamily,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn gate(hypothesis: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Gate {
            hypothesis: hypothesis.into(),
            detail: detail.into(),
        }
    }
}
