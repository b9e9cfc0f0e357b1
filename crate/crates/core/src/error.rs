use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),

    #[error("level {level} of space '{space}' is exhausted (finite level set)")]
    LevelExhausted { space: String, level: u32 },

    #[error("space '{0}' has no codimension metadata")]
    Unclassifiable(String),

    #[error("construction refused: space '{0}' satisfies the invariant subspace property")]
    ConstructionRefused(String),

    #[error("horizon error: {0}")]
    Horizon(String),

    #[error("horizon limit: stage {stage} needs at least {needed} positions (limit {limit})")]
    HorizonLimit { stage: usize, needed: u64, limit: u64 },

    #[error("certificate failure at stage {stage}: condition {condition} at {location} (relative margin {margin:e})")]
    Certificate { stage: usize, condition: String, location: String, margin: f64 },

    #[error("frame error: {0}")]
    Frame(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zero vector has no cyclicity witness")]
    ZeroVector,

    #[error("witness error: {0}")]
    Witness(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
