use thiserror::Error;

use crate::opcore::{Index, IndexSet};

/// Errors surfaced by the operator calculus and the analysis layers.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("index set mismatch: expected {expected}, got {got}")]
    IndexSetMismatch { expected: IndexSet, got: IndexSet },
    #[error("index {index} out of range for {set}")]
    IndexOutOfRange { index: Index, set: IndexSet },
    #[error("index arithmetic overflow")]
    IndexOverflow,
    #[error("empty window")]
    EmptyWindow,
    #[error("window [{lo}, {hi}] not contained in {set}")]
    WindowOutOfRange { lo: Index, hi: Index, set: IndexSet },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported operator structure: {0}")]
    UnsupportedStructure(String),
    #[error("missing certificate: {0}")]
    MissingCertificate(String),
    #[error("inconsistent certificate for {role}: {detail}")]
    InconsistentCertificate { role: String, detail: String },
    #[error("premises undecided: {0}")]
    PremisesUndecided(String),
    #[error("numerical routine failed to converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
