use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("FASTA record {record}: {reason}")]
    Fasta { record: usize, reason: String },

    #[error("invalid read {id:?}: {reason}")]
    InvalidRead { id: String, reason: String },

    #[error("sequence of length {len} is shorter than the required {required}")]
    SequenceTooShort { len: usize, required: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pool for class {label} holds {available} reads, {requested} requested")]
    InsufficientPool {
        label: String,
        available: usize,
        requested: usize,
    },

    #[error(
        "random-walk product graph for pair ({i}, {j}) has {product_nodes} nodes, cap is {cap}"
    )]
    ProductTooLarge {
        i: usize,
        j: usize,
        product_nodes: usize,
        cap: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("training data holds a single class")]
    SingleClass,

    #[error("{0} samples cannot be split into {1} folds")]
    TooFewSamples(usize, usize),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
