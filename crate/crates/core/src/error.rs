use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("channel matrix for subcarrier {subcarrier} is rank deficient")]
    RankDeficient { subcarrier: usize },

    #[error("no excess degrees of freedom: need more antennas ({n_antennas}) than users ({n_users})")]
    NoExcessDof { n_antennas: usize, n_users: usize },

    #[error("objective increased for {0} consecutive iterations; try a smaller step_size")]
    Divergence(usize),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable tag used as the machine-parsable prefix of CLI failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::RankDeficient { .. } => "rank-deficient",
            Error::NoExcessDof { .. } => "no-excess-dof",
            Error::Divergence(_) => "divergence",
            Error::Undefined(_) => "undefined",
            Error::Format(_) => "format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
