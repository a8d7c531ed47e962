use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("allocation entry {value} for MDC {mdc} is outside 0..={max}")]
    AllocationOutOfRange { mdc: usize, value: usize, max: usize },

    #[error("encoded allocation {encoded} is outside 0..{limit}")]
    ActionOutOfRange { encoded: u64, limit: u64 },

    #[error("action space (M+1)^N = {m_plus_one}^{n} does not fit in 64 bits")]
    ActionSpaceTooLarge { m_plus_one: usize, n: usize },

    #[error("episode already finished; call reset before stepping")]
    TerminalState,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("backward called without a cached forward pass")]
    NoForwardCache,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("replay buffer holds {have} transitions, need {need}")]
    UnderfullBuffer { have: usize, need: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
