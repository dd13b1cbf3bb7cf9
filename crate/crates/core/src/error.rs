use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("zero norm")]
    ZeroNorm,
    #[error("plane-wave wavenumber {k} is not a multiple of 2π/{length}")]
    Incommensurate { k: f64, length: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid field spec: {0}")]
    InvalidField(String),
    #[error("field spec is not closed under differentiation: {0}")]
    NotClosed(String),
    #[error("empty test-state set")]
    EmptyTestSet,
    #[error("unknown catalog entry {name:?}; valid names: {}", valid.join(", "))]
    UnknownCatalogEntry { name: String, valid: Vec<String> },
    #[error("functional index {0} out of range 1..=5")]
    FunctionalIndex(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("instability at step {step}: {reason}")]
    Instability { step: usize, reason: String },
    #[error("need at least 3 snapshots, got {0}")]
    TooFewSnapshots(usize),
    #[error("non-uniform recording interval")]
    NonUniformRecording,
    #[error("phase undefined at node (grid index {index})")]
    PhaseNode { index: usize },
    #[error("node crossing at record {record} (t = {time}): phase undefined at grid index {index}")]
    NodeCrossing { record: usize, time: f64, index: usize },
    #[error("gauge parameters are not rho-preserving (kappa = {kappa}, amp = {amp})")]
    NotRhoPreserving { kappa: f64, amp: f64 },
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
