use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = PprError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PprError {
    #[error("{path}:{line}: malformed edge line: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: negative edge weight {weight}")]
    NegativeWeight {
        path: PathBuf,
        line: usize,
        weight: f64,
    },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("node {node} out of range (n = {n})")]
    NodeOutOfRange { node: NodeId, n: usize },

    #[error("node {0} has no incident edges")]
    IsolatedNode(NodeId),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("graph with {n} nodes exceeds the dense limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("non-positive threshold {theta} on directed edge {edge}")]
    NonPositiveThreshold { edge: usize, theta: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("estimate has no positive entry")]
    ZeroEstimate,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(PprError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

pub(crate) fn check_unit_open(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(PprError::InvalidParameter(format!(
            "{name} must lie in (0, 1), got {value}"
        )))
    }
}
