//! Approximate single-source Personalized PageRank on undirected weighted
//! graphs: edge-granular push, node-granular push, exact oracles, baselines,
//! unbalancedness metrics, sweep-cut clustering and synthetic generators.

pub mod baselines;
pub mod bench;
pub mod edge_push;
pub mod error;
pub mod eval;
pub mod estimate;
pub mod graph;
pub mod local_push;
pub mod oracle;
pub mod unbalance;
mod sparse;
pub mod synth;

pub use edge_push::{
    edgepush, edgepush_additive, edgepush_l1, edgepush_with, edgepush_with_scan_switch,
    predicted_push_bound, EdgePushAccounting, EdgePushOptions, EdgePushState, EdgeThresholds,
    ThresholdPolicy,
};
pub use error::{PprError, Result};
pub use estimate::PprEstimate;
pub use graph::{sample_sources, LoadOptions, NodeId, SourceDistribution, SourceMode, WeightedGraph};
pub use local_push::{
    localpush, localpush_additive, localpush_l1, localpush_with, LocalPushOptions,
    LocalPushState, PushAccounting,
};
pub use oracle::{exact_ppr, ground_truth, ppr_matrix, PprMatrix, PprVector};
