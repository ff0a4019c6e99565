//! Node-granular forward push with a global termination threshold.
//!
//! A node `u` is eligible while `r(u) ≥ d(u)·θ`. Pushing `u` moves `α·r(u)`
//! into the reserve and spreads `(1−α)·r(u)` over the neighbors in proportion
//! to edge weight. Eligible nodes are served in FIFO order; a node is enqueued
//! the moment its residue crosses the threshold.

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_unit_open, PprError, Result};
use crate::estimate::PprEstimate;
use crate::graph::{NodeId, WeightedGraph};
use crate::sparse::NodeMap;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PushAccounting {
    pub node_pushes: u64,
    /// `Σ n(u)` over performed pushes.
    pub edge_touches: u64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LocalPushOptions {
    /// Re-verify the frontier, sign and conservation invariants after every
    /// push. Costs a scan over all touched nodes per push.
    pub instrumented: bool,
}

#[derive(Debug, Clone)]
pub struct LocalPushState<'g> {
    graph: &'g WeightedGraph,
    source: NodeId,
    alpha: f64,
    theta: f64,
    residue: NodeMap<f64>,
    reserve: NodeMap<f64>,
    queued: NodeMap<bool>,
    frontier: VecDeque<NodeId>,
    accounting: PushAccounting,
}

impl<'g> LocalPushState<'g> {
    pub fn new(graph: &'g WeightedGraph, source: NodeId, alpha: f64, theta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        graph.check_node(source)?;
        if !(theta > 0.0) {
            return Err(PprError::InvalidParameter(format!(
                "theta must be positive, got {theta}"
            )));
        }
        let n = graph.n();
        let mut state = Self {
            graph,
            source,
            alpha,
            theta,
            residue: NodeMap::new(n),
            reserve: NodeMap::new(n),
            queued: NodeMap::new(n),
            frontier: VecDeque::new(),
            accounting: PushAccounting::default(),
        };
        state.residue.set(source, 1.0);
        if graph.out_degree(source) > 0 && 1.0 >= graph.degree(source) * theta {
            state.enqueue(source);
        }
        Ok(state)
    }

    fn enqueue(&mut self, u: NodeId) {
        self.queued.set(u, true);
        self.frontier.push_back(u);
    }

    /// Performs one push and returns the pushed node, or `None` once no node
    /// is eligible.
    pub fn step(&mut self) -> Option<NodeId> {
        let g = self.graph;
        let u = self.frontier.pop_front()?;
        self.queued.set(u, false);
        let r = self.residue.get(u);
        self.reserve.add(u, self.alpha * r);
        self.residue.set(u, 0.0);
        let d = g.degree(u);
        let spread = (1.0 - self.alpha) * r;
        for (v, w) in g.neighbors(u) {
            let rv = self.residue.add(v, spread * w / d);
            if !self.queued.get(v) && rv >= g.degree(v) * self.theta {
                self.enqueue(v);
            }
        }
        self.accounting.node_pushes += 1;
        self.accounting.edge_touches += g.out_degree(u) as u64;
        Some(u)
    }

    pub fn run(&mut self, options: LocalPushOptions) -> Result<()> {
        let start = Instant::now();
        while self.step().is_some() {
            if options.instrumented {
                self.check_invariants()?;
            }
        }
        self.accounting.wall_time += start.elapsed().as_secs_f64();
        if options.instrumented {
            self.check_invariants()?;
        }
        Ok(())
    }

    pub fn residue(&self) -> Vec<f64> {
        self.residue.to_dense()
    }

    pub fn reserve(&self) -> Vec<f64> {
        self.reserve.to_dense()
    }

    pub fn residue_at(&self, u: NodeId) -> f64 {
        self.residue.get(u)
    }

    pub fn reserve_at(&self, u: NodeId) -> f64 {
        self.reserve.get(u)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn accounting(&self) -> PushAccounting {
        self.accounting
    }

    pub fn is_done(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn estimate(&self) -> PprEstimate {
        if self.graph.out_degree(self.source) == 0 {
            return PprEstimate::indicator(self.source, self.alpha, self.graph.n());
        }
        PprEstimate::from_sparse(self.source, self.alpha, self.graph.n(), self.reserve.nonzero())
    }

    /// Frontier equals `{u : r(u) ≥ d(u)θ}`, values are non-negative and
    /// `Σπ̂ + Σr = 1`.
    pub fn check_invariants(&self) -> Result<()> {
        let g = self.graph;
        let fail = |msg: String| Err(PprError::InvariantViolation(msg));
        let residues = self.residue.nonzero();
        let reserves = self.reserve.nonzero();
        let mut total = 0.0;
        for &(u, r) in &residues {
            if r < -1e-15 {
                return fail(format!("negative residue {r} at {u}"));
            }
            total += r;
        }
        for &(u, p) in &reserves {
            if p < -1e-15 {
                return fail(format!("negative reserve {p} at {u}"));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-10 {
            return fail(format!("mass not conserved: total {total}"));
        }
        let mut expected: Vec<NodeId> = residues
            .iter()
            .filter(|&&(u, r)| g.out_degree(u) > 0 && r >= g.degree(u) * self.theta)
            .map(|&(u, _)| u)
            .collect();
        let mut actual: Vec<NodeId> = self.frontier.iter().copied().collect();
        expected.sort_unstable();
        actual.sort_unstable();
        if expected != actual {
            return fail(format!(
                "frontier {actual:?} differs from eligible set {expected:?}"
            ));
        }
        Ok(())
    }
}

pub fn localpush(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    theta: f64,
) -> Result<(PprEstimate, PushAccounting)> {
    localpush_with(g, s, alpha, theta, LocalPushOptions::default())
}

pub fn localpush_with(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    theta: f64,
    options: LocalPushOptions,
) -> Result<(PprEstimate, PushAccounting)> {
    let mut state = LocalPushState::new(g, s, alpha, theta)?;
    state.run(options)?;
    Ok((state.estimate(), state.accounting()))
}

/// `θ = ε / ‖A‖₁` guarantees `ℓ1` error at most `ε`.
pub fn l1_theta(g: &WeightedGraph, epsilon: f64) -> Result<f64> {
    check_unit_open("epsilon", epsilon)?;
    Ok(epsilon / g.total_weight())
}

pub fn localpush_l1(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    epsilon: f64,
) -> Result<(PprEstimate, PushAccounting)> {
    localpush(g, s, alpha, l1_theta(g, epsilon)?)
}

/// `θ = r_max` guarantees `|π(t) − π̂(t)| / d(t) ≤ r_max` for every `t`.
pub fn localpush_additive(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    r_max: f64,
) -> Result<(PprEstimate, PushAccounting)> {
    check_r_max(r_max)?;
    localpush(g, s, alpha, r_max)
}

pub(crate) fn check_r_max(r_max: f64) -> Result<()> {
    if r_max > 0.0 && r_max <= 1.0 {
        Ok(())
    } else {
        Err(PprError::InvalidParameter(format!(
            "r_max must lie in (0, 1], got {r_max}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> WeightedGraph {
        WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn two_node_trace() {
        let g = two_node();
        let mut st = LocalPushState::new(&g, 0, 0.2, 0.3).unwrap();
        let mut order = Vec::new();
        while let Some(u) = st.step() {
            order.push(u);
            st.check_invariants().unwrap();
        }
        // At most one node is eligible at any time, so the order is forced.
        assert_eq!(order, vec![0, 1, 0, 1, 0, 1]);
        assert!((st.reserve_at(0) - 0.40992).abs() < 1e-12);
        assert!((st.reserve_at(1) - 0.327936).abs() < 1e-12);
        assert!((st.residue_at(0) - 0.262144).abs() < 1e-12);
        assert_eq!(st.residue_at(1), 0.0);
        assert_eq!(st.accounting().node_pushes, 6);
        assert_eq!(st.accounting().edge_touches, 6);
    }

    #[test]
    fn threshold_above_start_means_no_push() {
        let (est, acc) = localpush(&two_node(), 0, 0.2, 2.0).unwrap();
        assert_eq!(acc.node_pushes, 0);
        assert_eq!(est.sum(), 0.0);
    }

    #[test]
    fn tiny_threshold_converges() {
        let g = two_node();
        let (est, _) = localpush(&g, 0, 0.2, 1e-12).unwrap();
        let exact = [0.2 / 0.36, 0.16 / 0.36];
        let l1: f64 = (0..2).map(|t| (est.get(t) - exact[t as usize]).abs()).sum();
        assert!(l1 < 1e-9);
    }

    #[test]
    fn l1_policy_reuses_trace() {
        let g = two_node();
        assert_eq!(l1_theta(&g, 0.6).unwrap(), 0.3);
        let (est, acc) = localpush_l1(&g, 0, 0.2, 0.6).unwrap();
        assert!((est.get(0) - 0.40992).abs() < 1e-12);
        assert_eq!(acc.node_pushes, 6);
    }

    #[test]
    fn additive_r_max_one_pushes_only_trivially() {
        let g = two_node();
        let (_, acc) = localpush_additive(&g, 0, 0.2, 1.0).unwrap();
        // r(s) = 1 ≥ d(s)·1 fires once; the neighbor then holds 0.8 < 1.
        assert_eq!(acc.node_pushes, 1);
        assert!(localpush_additive(&g, 0, 0.2, 0.0).is_err());
        assert!(localpush_additive(&g, 0, 0.2, 1.5).is_err());
    }

    #[test]
    fn isolated_source_returns_indicator() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        let (est, acc) = localpush(&g, 2, 0.2, 1e-3).unwrap();
        assert!(est.isolated_source);
        assert_eq!(est.to_dense(), vec![0.0, 0.0, 1.0]);
        assert_eq!(acc.node_pushes, 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = two_node();
        assert!(LocalPushState::new(&g, 0, 0.2, 0.0).is_err());
        assert!(LocalPushState::new(&g, 0, 1.2, 0.1).is_err());
        assert!(LocalPushState::new(&g, 3, 0.2, 0.1).is_err());
        assert!(localpush_l1(&g, 0, 0.2, 1.0).is_err());
    }

    #[test]
    fn instrumented_run_passes() {
        let g = WeightedGraph::from_edges(
            5,
            &[(0, 1, 1.0), (1, 2, 4.0), (2, 3, 0.5), (3, 4, 2.0), (4, 0, 1.5), (1, 3, 0.25)],
        )
        .unwrap();
        localpush_with(&g, 2, 0.15, 1e-4, LocalPushOptions { instrumented: true }).unwrap();
    }
}
