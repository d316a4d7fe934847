use thiserror::Error;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("invalid cell: {0}")]
    InvalidCell(String),
    #[error("rank {rank} out of range (count {count})")]
    RankOutOfRange { rank: u64, count: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dense eigensolve of dimension {dim} exceeds the dense cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },
    #[error("vertex cap {cap} exceeded")]
    VertexCapExceeded { cap: usize },
    #[error("depth cap {cap} exceeded")]
    DepthCapExceeded { cap: usize },
    #[error("graph with {size} vertices exceeds the canonical-labeling cap {cap}")]
    CanonCapExceeded { size: usize, cap: usize },
    #[error("word enumeration with k = {k} exceeds the cap {cap}")]
    EnumerationCap { k: usize, cap: usize },
    #[error("unknown test function id: {0}")]
    UnknownTransportFn(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl LmError {
    /// Resource caps abort a computation; everything else is a validation failure.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            LmError::DenseCapExceeded { .. }
                | LmError::VertexCapExceeded { .. }
                | LmError::DepthCapExceeded { .. }
                | LmError::CanonCapExceeded { .. }
                | LmError::EnumerationCap { .. }
        )
    }
}

impl From<serde_json::Error> for LmError {
    fn from(e: serde_json::Error) -> Self {
        LmError::Parse(e.to_string())
    }
}
