use serde::{Deserialize, Serialize};

use crate::graph::NodeId;

/// A sparse approximate SSPPR vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PprEstimate {
    pub source: NodeId,
    pub alpha: f64,
    n: usize,
    /// Non-zero entries sorted by node id.
    entries: Vec<(NodeId, f64)>,
    /// Set when the source has no incident edges; the estimate is then the
    /// indicator vector of the source.
    pub isolated_source: bool,
}

impl PprEstimate {
    pub fn from_sparse(source: NodeId, alpha: f64, n: usize, mut entries: Vec<(NodeId, f64)>) -> Self {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_unstable_by_key(|&(u, _)| u);
        Self {
            source,
            alpha,
            n,
            entries,
            isolated_source: false,
        }
    }

    pub fn from_dense(source: NodeId, alpha: f64, values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(u, &v)| (u as NodeId, v))
            .collect();
        Self {
            source,
            alpha,
            n: values.len(),
            entries,
            isolated_source: false,
        }
    }

    pub(crate) fn indicator(source: NodeId, alpha: f64, n: usize) -> Self {
        Self {
            source,
            alpha,
            n,
            entries: vec![(source, 1.0)],
            isolated_source: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn get(&self, u: NodeId) -> f64 {
        self.entries
            .binary_search_by_key(&u, |&(v, _)| v)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n];
        for &(u, v) in &self.entries {
            dense[u as usize] = v;
        }
        dense
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }
}
