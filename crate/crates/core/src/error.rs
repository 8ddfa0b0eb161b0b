use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value that should be impossible under the type invariants.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// An enumeration would exceed its candidate budget.
    #[error("enumeration budget of {budget} candidates exceeded ({needed} required)")]
    Budget { budget: u64, needed: u64 },

    /// A caller-supplied precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// An experiment configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
