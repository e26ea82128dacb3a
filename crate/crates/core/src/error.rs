use thiserror::Error;

use crate::affine::Interval;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{function} is undefined on [{}, {}]", .range.lo, .range.hi)]
    Domain {
        function: &'static str,
        range: Interval,
    },

    #[error("leaf kind mismatch: {0}")]
    LeafKind(String),

    #[error("no value assigned to {0}")]
    MissingSymbol(String),

    /// Every path of a diagram is infeasible.
    #[error("diagram has no feasible path")]
    Inconsistent,

    #[error("static MoC violation in `{process}`: {reason}")]
    StaticMoc { process: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown signal `{0}`")]
    UnknownSignal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn static_moc(process: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::StaticMoc {
            process: process.into(),
            reason: reason.into(),
        }
    }
}
