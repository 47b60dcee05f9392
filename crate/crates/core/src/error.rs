//! Error types shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric or structural parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Input data is malformed or inconsistent (duplicates, orphans, ...).
    #[error("data error: {0}")]
    Data(String),

    /// One or more input invariants failed; every problem is listed.
    #[error("validation failed:\n{}", problems.join("\n"))]
    Validation { problems: Vec<String> },

    /// An outcome record that is impossible under the model: infected
    /// with zero total exposure has zero likelihood for every `nu`.
    #[error("record {index}: infected outcome with rho_total = 0 is impossible under the model")]
    ImpossibleRecord { index: usize },

    /// The pairwise-independence approximation behind the symptom-free
    /// probability has broken down for the given exposure.
    #[error("model validity: {0}")]
    ModelValidity(String),

    /// A scan over the distribution grid ran past its horizon.
    #[error("horizon exceeded: {0}")]
    Horizon(String),

    /// A journal line could not be parsed.
    #[error("journal line {line}: {message}")]
    Journal { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
