use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration violates a structural constraint (named in `constraint`).
    #[error("infeasible configuration: {constraint}")]
    Infeasible { constraint: String },

    /// The Gram matrix of an effective channel is numerically rank deficient.
    #[error("singular channel{}", scheme.map(|m| format!(" (scheme {m})")).unwrap_or_default())]
    SingularChannel { scheme: Option<usize> },

    #[error("degenerate precoder: zero Frobenius norm")]
    DegeneratePrecoder,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("too many singular redraws: {redraws} of {draws} draws")]
    ExcessiveSingularity { redraws: u64, draws: u64 },

    #[error("unknown mode '{0}'")]
    UnknownMode(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short stable tag, used for machine-parsable CLI output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Infeasible { .. } => "infeasible",
            Error::SingularChannel { .. } => "singular_channel",
            Error::DegeneratePrecoder => "degenerate_precoder",
            Error::Domain(_) => "domain",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::ExcessiveSingularity { .. } => "excessive_singularity",
            Error::UnknownMode(_) => "unknown_mode",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn infeasible(constraint: impl Into<String>) -> Self {
        Error::Infeasible {
            constraint: constraint.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
