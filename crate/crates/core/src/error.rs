use thiserror::Error;

/// Errors surfaced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid scenario configuration or operation preconditions.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mismatched vector/matrix dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Channel file parsing or consistency failure.
    #[error("channel file error: {0}")]
    ChannelFile(String),

    /// Malformed conic problem (bad cone dimensions, index out of range).
    #[error("conic problem error: {0}")]
    Conic(String),

    /// A UE has a zero effective channel in every configuration.
    #[error("unreachable UE: {0}")]
    Unreachable(String),

    /// Scenario is infeasible (e.g. K*tau_min > 1).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Brute-force enumeration budget exceeded.
    #[error("oracle budget exceeded: {0}")]
    Budget(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
