use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("parse error at line {line}: {msg}")]
    ParseLine { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parity-check matrix is rank deficient: rank {rank} < {rows} rows")]
    RankDeficient { rank: usize, rows: usize },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("training diverged at layer {layer}: loss {loss}")]
    Divergence { layer: usize, loss: f64 },

    #[error("threshold unreachable: tau = {tau:.4} but the achievable range is [0, {max_tau:.4}]")]
    Unreachable { tau: f64, max_tau: f64 },

    #[error("undefined result: {0}")]
    Undefined(String),

    #[error("commitment refused: {0}")]
    Refused(String),

    #[error("entropy source failure: {0}")]
    Entropy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
