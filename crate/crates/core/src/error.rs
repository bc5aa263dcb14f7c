use thiserror::Error;

/// Errors produced by any stage of the triage pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid bug spec: {0}")]
    InvalidBugSpec(String),

    #[error("invalid noise model: {0}")]
    InvalidNoiseModel(String),

    #[error("channel parameter out of range: {0}")]
    ChannelParam(String),

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("invalid feature input: {0}")]
    InvalidFeatures(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("unknown circuit family: {0}")]
    UnknownFamily(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
