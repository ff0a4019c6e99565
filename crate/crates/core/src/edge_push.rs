//! Edge-granular push with per-edge termination thresholds.
//!
//! The solver keeps a node income `q(v)` and an edge expense `Q_uv` for every
//! directed edge. The residue of a directed edge is implicit,
//!
//! ```text
//! R_uv = (1−α)·q(u)·A_uv/d(u) − Q_uv,
//! ```
//!
//! and an edge is a push candidate while `R_uv ≥ θ(u,v)`. Pushing `⟨u,v⟩`
//! adds `R_uv` to both `Q_uv` and `q(v)`, which zeroes `R_uv` and raises the
//! residues of every edge leaving `v` at once. The estimate is `α·q`.
//!
//! Candidates are located with a two-level structure. Each node `u` orders
//! its out-edges by `k_u(v) = (Q_uv + θ(u,v))/A_uv`; an edge is a candidate iff
//! `(1−α)q(u)/d(u) ≥ k_u(v)`, so `u` owns a candidate iff its smallest key
//! passes that test. Nodes that do are kept in a FIFO active list, and the
//! head node is drained of all its candidate edges before the next one is
//! served. Keys only grow, so untouched edges are served from a presorted
//! cursor and touched edges live in a binary heap (increase-key is pop +
//! reinsert).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_unit_open, PprError, Result};
use crate::estimate::PprEstimate;
use crate::graph::{NodeId, WeightedGraph};
use crate::local_push::check_r_max;
use crate::oracle::PprVector;

/// Default occupancy at which the sequential-scan mode takes over, as a
/// fraction of `2m`.
pub const DEFAULT_SCAN_FRACTION: f64 = 0.125;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum ThresholdPolicy {
    /// `θ(u,v) = ε·√A_uv / Σ_{⟨x,y⟩∈Ē} √A_xy`; bounds the `ℓ1` error by `ε`.
    L1 { epsilon: f64 },
    /// `θ(u,v) = r_max·d(v)·√A_uv / Σ_{x∈N(v)} √A_xv`; bounds the
    /// degree-normalized additive error by `r_max`.
    Additive { r_max: f64 },
    /// Caller-supplied per-edge values.
    Explicit,
}

/// Per-directed-edge termination thresholds bound to one graph.
///
/// Thresholds of the two closed-form policies are recomputed on demand from
/// the graph's aggregates. The struct also carries, for every node, the order
/// in which its untouched out-edges are served (ascending `θ(u,v)/A_uv`);
/// when the graph's own descending-weight order already is that order no
/// permutation is stored.
#[derive(Debug, Clone)]
pub struct EdgeThresholds {
    policy: ThresholdPolicy,
    explicit: Option<Vec<f64>>,
    order: Option<Vec<u32>>,
    num_edges: usize,
}

impl EdgeThresholds {
    pub fn l1(g: &WeightedGraph, epsilon: f64) -> Result<Self> {
        check_unit_open("epsilon", epsilon)?;
        Ok(Self::build(g, ThresholdPolicy::L1 { epsilon }, None))
    }

    pub fn additive(g: &WeightedGraph, r_max: f64) -> Result<Self> {
        check_r_max(r_max)?;
        Ok(Self::build(g, ThresholdPolicy::Additive { r_max }, None))
    }

    /// `thetas` is indexed by directed-edge index.
    pub fn explicit(g: &WeightedGraph, thetas: Vec<f64>) -> Result<Self> {
        if thetas.len() != g.num_directed_edges() {
            return Err(PprError::DimensionMismatch {
                expected: g.num_directed_edges(),
                actual: thetas.len(),
            });
        }
        if let Some((edge, &theta)) = thetas.iter().enumerate().find(|(_, &t)| !(t > 0.0)) {
            return Err(PprError::NonPositiveThreshold { edge, theta });
        }
        Ok(Self::build(g, ThresholdPolicy::Explicit, Some(thetas)))
    }

    /// The same threshold on every directed edge.
    pub fn uniform(g: &WeightedGraph, theta: f64) -> Result<Self> {
        Self::explicit(g, vec![theta; g.num_directed_edges()])
    }

    fn build(g: &WeightedGraph, policy: ThresholdPolicy, explicit: Option<Vec<f64>>) -> Self {
        let mut th = Self {
            policy,
            explicit,
            order: None,
            num_edges: g.num_directed_edges(),
        };
        let csr_sorted = (0..g.n() as NodeId).all(|u| {
            let r = g.edge_range(u);
            r.clone()
                .zip(r.skip(1))
                .all(|(a, b)| th.initial_key(g, a) <= th.initial_key(g, b))
        });
        if !csr_sorted {
            let mut order = Vec::with_capacity(th.num_edges);
            let mut row: Vec<(f64, u32)> = Vec::new();
            for u in 0..g.n() as NodeId {
                let r = g.edge_range(u);
                row.clear();
                row.extend(r.clone().map(|e| (th.initial_key(g, e), (e - r.start) as u32)));
                row.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                order.extend(row.iter().map(|&(_, slot)| slot));
            }
            th.order = Some(order);
        }
        th
    }

    pub fn policy(&self) -> ThresholdPolicy {
        self.policy
    }

    /// `θ` of directed edge `e`.
    #[inline]
    pub fn theta(&self, g: &WeightedGraph, e: usize) -> f64 {
        match self.policy {
            ThresholdPolicy::L1 { epsilon } => epsilon * g.weight(e).sqrt() / g.sqrt_weight_sum(),
            ThresholdPolicy::Additive { r_max } => {
                let v = g.target(e);
                r_max * g.degree(v) * g.weight(e).sqrt() / g.node_sqrt_sum(v)
            }
            ThresholdPolicy::Explicit => self.explicit.as_ref().expect("explicit thresholds")[e],
        }
    }

    #[inline]
    fn initial_key(&self, g: &WeightedGraph, e: usize) -> f64 {
        (0.0 + self.theta(g, e)) / g.weight(e)
    }

    /// `Σ θ(u,v)` over all directed edges.
    pub fn total(&self, g: &WeightedGraph) -> f64 {
        (0..g.num_directed_edges()).map(|e| self.theta(g, e)).sum()
    }

    /// Directed-edge index of the `rank`-th untouched edge of `u`.
    #[inline]
    fn ordered_edge(&self, g: &WeightedGraph, u: NodeId, rank: usize) -> usize {
        let start = g.edge_range(u).start;
        match &self.order {
            Some(order) => start + order[start + rank] as usize,
            None => start + rank,
        }
    }

    fn check_graph(&self, g: &WeightedGraph) -> Result<()> {
        if self.num_edges == g.num_directed_edges() {
            Ok(())
        } else {
            Err(PprError::DimensionMismatch {
                expected: g.num_directed_edges(),
                actual: self.num_edges,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgePushAccounting {
    pub edge_pushes: u64,
    /// Heap operations, cursor advances, active-list operations and, in scan
    /// mode, edge inspections.
    pub queue_ops: u64,
    pub scan_switches: u64,
    /// Directed edges read: one per push in queue mode, every scanned edge in
    /// scan mode.
    pub edges_touched: u64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgePushOptions {
    /// Switch to round-based sequential scans once the out-degree sum of the
    /// active nodes exceeds this fraction of `2m`.
    pub scan_fraction: Option<f64>,
    /// Full-scan invariant checks after every push (test use; quadratic).
    pub instrumented: bool,
}

/// One performed edge push.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePushEvent {
    pub from: NodeId,
    pub to: NodeId,
    pub edge: usize,
    pub amount: f64,
    /// `k_u(v)` before the push.
    pub key_before: f64,
    /// `k_u(v)` after the push.
    pub key_after: f64,
}

#[derive(Debug, Clone, Copy)]
struct Touched {
    key: f64,
    slot: u32,
    expense: f64,
}

impl PartialEq for Touched {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Touched {}

impl PartialOrd for Touched {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Touched {
    // Reversed so that BinaryHeap pops the smallest (key, slot).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then(other.slot.cmp(&self.slot))
    }
}

#[derive(Debug, Clone, Default)]
struct NodeQueue {
    /// Untouched edges at ranks `cursor..` still have `Q = 0`.
    cursor: u32,
    touched: BinaryHeap<Touched>,
}

#[derive(Debug, Clone, Copy)]
struct Top {
    key: f64,
    slot: u32,
    from_heap: bool,
}

#[derive(Debug, Clone)]
enum Mode {
    Queue,
    Scan { expense: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct EdgePushState<'a> {
    graph: &'a WeightedGraph,
    thresholds: &'a EdgeThresholds,
    source: NodeId,
    alpha: f64,
    income: Vec<f64>,
    queues: Vec<NodeQueue>,
    active: VecDeque<NodeId>,
    /// Node being drained; taken off `active` but still flagged.
    current: Option<NodeId>,
    in_active: Vec<bool>,
    active_volume: usize,
    mode: Mode,
    options: EdgePushOptions,
    accounting: EdgePushAccounting,
    buffer: Vec<Touched>,
}

impl<'a> EdgePushState<'a> {
    pub fn new(
        graph: &'a WeightedGraph,
        source: NodeId,
        alpha: f64,
        thresholds: &'a EdgeThresholds,
        options: EdgePushOptions,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        graph.check_node(source)?;
        thresholds.check_graph(graph)?;
        if let Some(f) = options.scan_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(PprError::InvalidParameter(format!(
                    "scan fraction must lie in (0, 1], got {f}"
                )));
            }
        }
        let n = graph.n();
        let mut state = Self {
            graph,
            thresholds,
            source,
            alpha,
            income: vec![0.0; n],
            queues: vec![NodeQueue::default(); n],
            active: VecDeque::new(),
            current: None,
            in_active: vec![false; n],
            active_volume: 0,
            mode: Mode::Queue,
            options,
            accounting: EdgePushAccounting::default(),
            buffer: Vec::new(),
        };
        state.income[source as usize] = 1.0;
        if state.is_active(source) {
            state.activate(source);
        }
        Ok(state)
    }

    #[inline]
    fn top(&self, u: NodeId) -> Option<Top> {
        let g = self.graph;
        let queue = &self.queues[u as usize];
        let untouched = if (queue.cursor as usize) < g.out_degree(u) {
            let e = self.thresholds.ordered_edge(g, u, queue.cursor as usize);
            Some(Top {
                key: self.thresholds.initial_key(g, e),
                slot: (e - g.edge_range(u).start) as u32,
                from_heap: false,
            })
        } else {
            None
        };
        let touched = queue.touched.peek().map(|t| Top {
            key: t.key,
            slot: t.slot,
            from_heap: true,
        });
        match (untouched, touched) {
            (Some(a), Some(b)) => {
                if b.key.total_cmp(&a.key).then(b.slot.cmp(&a.slot)) == Ordering::Less {
                    Some(b)
                } else {
                    Some(a)
                }
            }
            (a, b) => a.or(b),
        }
    }

    #[inline]
    fn mass_rate(&self, u: NodeId) -> f64 {
        (1.0 - self.alpha) * self.income[u as usize] / self.graph.degree(u)
    }

    /// `K_u ≤ 0`: the smallest key of `u` is covered by `(1−α)q(u)/d(u)`.
    #[inline]
    fn is_active(&self, u: NodeId) -> bool {
        match self.top(u) {
            Some(top) => self.mass_rate(u) >= top.key,
            None => false,
        }
    }

    /// `K_u = −(1−α)q(u)/d(u) + min_v k_u(v)`; `+∞` for isolated nodes.
    pub fn global_key(&self, u: NodeId) -> f64 {
        match self.top(u) {
            Some(top) => -self.mass_rate(u) + top.key,
            None => f64::INFINITY,
        }
    }

    /// Smallest-key edge of `u` as `(directed edge index, key)`.
    pub fn queue_top(&self, u: NodeId) -> Option<(usize, f64)> {
        self.top(u)
            .map(|t| (self.graph.edge_range(u).start + t.slot as usize, t.key))
    }

    fn activate(&mut self, u: NodeId) {
        self.in_active[u as usize] = true;
        self.active.push_back(u);
        self.active_volume += self.graph.out_degree(u);
        self.accounting.queue_ops += 1;
    }

    /// Performs one edge push in queue mode. Returns `None` when no candidate
    /// edge is left or the solver has switched to scan mode.
    ///
    /// The head of the active list is drained: all of its candidate edges are
    /// pushed, in key order, before the next node is served. Its rate
    /// `(1−α)q(u)/d(u)` cannot change meanwhile and a pushed edge's new key
    /// exceeds that rate, so the drained set is fixed when the node is taken.
    pub fn step(&mut self) -> Option<EdgePushEvent> {
        if !matches!(self.mode, Mode::Queue) {
            return None;
        }
        let u = match self.current {
            Some(u) => u,
            None => self.take_head()?,
        };
        let top = self.top(u).expect("active node has out-edges");
        let (event, entry) = self.push_top(u, top);
        self.queues[u as usize].touched.push(entry);
        self.accounting.queue_ops += 1;
        if !self.is_active(u) {
            self.finish_node(u);
        }
        Some(event)
    }

    fn take_head(&mut self) -> Option<NodeId> {
        let u = self.active.pop_front()?;
        self.accounting.queue_ops += 1;
        self.current = Some(u);
        Some(u)
    }

    fn finish_node(&mut self, u: NodeId) {
        self.current = None;
        self.in_active[u as usize] = false;
        self.active_volume -= self.graph.out_degree(u);
    }

    /// Drains the head node with heap reinsertion deferred to the end. Same
    /// pushes as repeated [`step`](Self::step) calls. Returns the number of
    /// pushes, or `None` when the active list is empty.
    fn drain_head(&mut self) -> Option<u64> {
        let u = match self.current {
            Some(u) => u,
            None => self.take_head()?,
        };
        let rate = self.mass_rate(u);
        let mut buffer = std::mem::take(&mut self.buffer);
        while let Some(top) = self.top(u).filter(|t| rate >= t.key) {
            let (_, entry) = self.push_top(u, top);
            buffer.push(entry);
        }
        let pushes = buffer.len() as u64;
        self.accounting.queue_ops += pushes;
        self.queues[u as usize].touched.extend(buffer.drain(..));
        self.buffer = buffer;
        self.finish_node(u);
        Some(pushes)
    }

    /// Pushes the queue-top edge of `u` and returns the event and the heap
    /// entry carrying its new key, which the caller reinserts.
    #[inline]
    fn push_top(&mut self, u: NodeId, top: Top) -> (EdgePushEvent, Touched) {
        let g = self.graph;
        let e = g.edge_range(u).start + top.slot as usize;
        let expense = if top.from_heap {
            self.queues[u as usize].touched.pop().expect("heap top").expense
        } else {
            self.queues[u as usize].cursor += 1;
            0.0
        };
        self.accounting.queue_ops += 1;

        let v = g.target(e);
        let w = g.weight(e);
        let amount = (1.0 - self.alpha) * self.income[u as usize] * w / g.degree(u) - expense;
        let new_expense = expense + amount;
        self.income[v as usize] += amount;
        let key_after = (new_expense + self.thresholds.theta(g, e)) / w;
        self.accounting.edge_pushes += 1;
        self.accounting.edges_touched += 1;

        if !self.in_active[v as usize] && self.is_active(v) {
            self.activate(v);
        }
        let event = EdgePushEvent {
            from: u,
            to: v,
            edge: e,
            amount,
            key_before: top.key,
            key_after,
        };
        let entry = Touched {
            key: key_after,
            slot: top.slot,
            expense: new_expense,
        };
        (event, entry)
    }

    fn should_switch(&self) -> bool {
        match self.options.scan_fraction {
            Some(f) => {
                matches!(self.mode, Mode::Queue)
                    && self.active_volume as f64 > f * self.graph.num_directed_edges() as f64
            }
            None => false,
        }
    }

    /// Abandons the two-level structure: expenses are materialized per
    /// directed edge and all further pushes happen in sequential scans.
    fn switch_to_scan(&mut self) {
        let expense = self.expenses();
        self.queues = Vec::new();
        self.active.clear();
        self.in_active = Vec::new();
        self.active_volume = 0;
        self.mode = Mode::Scan { expense };
        self.accounting.scan_switches += 1;
    }

    /// One pass over all directed edges, pushing every candidate. Returns the
    /// number of pushes performed.
    fn scan_round(&mut self) -> u64 {
        let g = self.graph;
        let th = self.thresholds;
        let alpha = self.alpha;
        let Mode::Scan { expense } = &mut self.mode else {
            return 0;
        };
        let mut pushes = 0;
        for u in 0..g.n() as NodeId {
            let q_u = self.income[u as usize];
            if q_u == 0.0 {
                continue;
            }
            let d = g.degree(u);
            let rate = (1.0 - alpha) * q_u / d;
            let range = g.edge_range(u);
            self.accounting.edges_touched += range.len() as u64;
            self.accounting.queue_ops += range.len() as u64;
            for e in range {
                let w = g.weight(e);
                if rate >= (expense[e] + th.theta(g, e)) / w {
                    let amount = (1.0 - alpha) * q_u * w / d - expense[e];
                    expense[e] += amount;
                    self.income[g.target(e) as usize] += amount;
                    pushes += 1;
                }
            }
        }
        self.accounting.edge_pushes += pushes;
        pushes
    }

    pub fn run(&mut self) -> Result<()> {
        let start = Instant::now();
        loop {
            if self.current.is_none() && self.should_switch() {
                self.switch_to_scan();
                break;
            }
            if self.options.instrumented {
                if self.step().is_none() {
                    break;
                }
                self.check_invariants()?;
            } else if self.drain_head().is_none() {
                break;
            }
        }
        if matches!(self.mode, Mode::Scan { .. }) {
            while self.scan_round() > 0 {
                if self.options.instrumented {
                    self.check_invariants()?;
                }
            }
        }
        self.accounting.wall_time += start.elapsed().as_secs_f64();
        if self.options.instrumented {
            self.check_invariants()?;
            if let Some(e) = self.find_candidate() {
                return Err(PprError::InvariantViolation(format!(
                    "edge {e} still eligible after termination"
                )));
            }
        }
        Ok(())
    }

    pub fn income(&self) -> &[f64] {
        &self.income
    }

    /// `Q` per directed edge.
    pub fn expenses(&self) -> Vec<f64> {
        match &self.mode {
            Mode::Scan { expense } => expense.clone(),
            Mode::Queue => {
                let g = self.graph;
                let mut out = vec![0.0; g.num_directed_edges()];
                for (u, queue) in self.queues.iter().enumerate() {
                    let start = g.edge_range(u as NodeId).start;
                    for t in queue.touched.iter() {
                        out[start + t.slot as usize] = t.expense;
                    }
                }
                out
            }
        }
    }

    /// `R_uv` per directed edge; values within `1e-12` below zero are clamped.
    pub fn residues(&self) -> Vec<f64> {
        let g = self.graph;
        let expense = self.expenses();
        let mut out = vec![0.0; g.num_directed_edges()];
        for u in 0..g.n() as NodeId {
            let d = g.degree(u);
            for e in g.edge_range(u) {
                let r = (1.0 - self.alpha) * self.income[u as usize] * g.weight(e) / d - expense[e];
                out[e] = if r < 0.0 && r > -1e-12 { 0.0 } else { r };
            }
        }
        out
    }

    pub fn total_residue(&self) -> f64 {
        self.residues().iter().sum()
    }

    /// Nodes currently in the active list, in service order.
    pub fn active_nodes(&self) -> Vec<NodeId> {
        self.current.into_iter().chain(self.active.iter().copied()).collect()
    }

    pub fn is_scanning(&self) -> bool {
        matches!(self.mode, Mode::Scan { .. })
    }

    pub fn accounting(&self) -> EdgePushAccounting {
        self.accounting
    }

    pub fn estimate(&self) -> PprEstimate {
        let n = self.graph.n();
        if self.graph.out_degree(self.source) == 0 {
            return PprEstimate::indicator(self.source, self.alpha, n);
        }
        let entries = self
            .income
            .iter()
            .enumerate()
            .filter(|(_, &q)| q != 0.0)
            .map(|(u, &q)| (u as NodeId, self.alpha * q))
            .collect();
        PprEstimate::from_sparse(self.source, self.alpha, n, entries)
    }

    /// First directed edge satisfying the candidate condition, by full scan.
    pub fn find_candidate(&self) -> Option<usize> {
        let g = self.graph;
        let expense = self.expenses();
        (0..g.n() as NodeId).find_map(|u| {
            if g.out_degree(u) == 0 {
                return None;
            }
            let rate = self.mass_rate(u);
            g.edge_range(u)
                .find(|&e| rate >= (expense[e] + self.thresholds.theta(g, e)) / g.weight(e))
        })
    }

    /// Full recomputation of the structural invariants: non-negative
    /// residues, income equals incoming expenses, and (in queue mode) heap
    /// keys, active-list membership and the top-edge property.
    pub fn check_invariants(&self) -> Result<()> {
        let g = self.graph;
        let fail = |msg: String| Err(PprError::InvariantViolation(msg));
        let expense = self.expenses();
        let mut inflow = vec![0.0; g.n()];
        inflow[self.source as usize] = 1.0;
        for u in 0..g.n() as NodeId {
            let d = g.degree(u);
            for e in g.edge_range(u) {
                let r = (1.0 - self.alpha) * self.income[u as usize] * g.weight(e) / d - expense[e];
                if r < -1e-12 {
                    return fail(format!("negative residue {r} on edge {e}"));
                }
                inflow[g.target(e) as usize] += expense[e];
            }
        }
        for (v, (&q, &f)) in self.income.iter().zip(&inflow).enumerate() {
            if (q - f).abs() > 1e-10 {
                return fail(format!("income {q} at {v} differs from inflow {f}"));
            }
        }
        if let Mode::Queue = self.mode {
            let mut seen = vec![false; g.n()];
            for u in self.active_nodes() {
                if std::mem::replace(&mut seen[u as usize], true) {
                    return fail(format!("node {u} listed twice"));
                }
            }
            for u in 0..g.n() as NodeId {
                let queue = &self.queues[u as usize];
                for t in queue.touched.iter() {
                    let e = g.edge_range(u).start + t.slot as usize;
                    let key = (t.expense + self.thresholds.theta(g, e)) / g.weight(e);
                    if key != t.key {
                        return fail(format!("stale key on edge {e}"));
                    }
                }
                let active = self.is_active(u);
                if active != self.in_active[u as usize] || active != seen[u as usize] {
                    return fail(format!("active list membership of {u} is wrong"));
                }
                if active {
                    let (e, _) = self.queue_top(u).expect("active node has a top edge");
                    let r = (1.0 - self.alpha) * self.income[u as usize] * g.weight(e)
                        / g.degree(u)
                        - expense[e];
                    if r < self.thresholds.theta(g, e) - 1e-12 {
                        return fail(format!("top edge {e} of active node {u} is not a candidate"));
                    }
                }
                // The top must be the minimum key over all out-edges.
                if let Some((_, top_key)) = self.queue_top(u) {
                    let min_key = g
                        .edge_range(u)
                        .map(|e| (expense[e] + self.thresholds.theta(g, e)) / g.weight(e))
                        .fold(f64::INFINITY, f64::min);
                    if top_key != min_key {
                        return fail(format!("queue top of {u} is not the minimum key"));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn edgepush(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    thresholds: &EdgeThresholds,
) -> Result<(PprEstimate, EdgePushAccounting)> {
    edgepush_with(g, s, alpha, thresholds, EdgePushOptions::default())
}

pub fn edgepush_with(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    thresholds: &EdgeThresholds,
    options: EdgePushOptions,
) -> Result<(PprEstimate, EdgePushAccounting)> {
    let mut state = EdgePushState::new(g, s, alpha, thresholds, options)?;
    state.run()?;
    Ok((state.estimate(), state.accounting()))
}

pub fn edgepush_l1(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    epsilon: f64,
) -> Result<(PprEstimate, EdgePushAccounting)> {
    let th = EdgeThresholds::l1(g, epsilon)?;
    edgepush(g, s, alpha, &th)
}

pub fn edgepush_additive(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    r_max: f64,
) -> Result<(PprEstimate, EdgePushAccounting)> {
    let th = EdgeThresholds::additive(g, r_max)?;
    edgepush(g, s, alpha, &th)
}

pub fn edgepush_with_scan_switch(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    thresholds: &EdgeThresholds,
    scan_threshold_fraction: f64,
) -> Result<(PprEstimate, EdgePushAccounting)> {
    edgepush_with(
        g,
        s,
        alpha,
        thresholds,
        EdgePushOptions {
            scan_fraction: Some(scan_threshold_fraction),
            instrumented: false,
        },
    )
}

/// Upper bound on the number of pushes along each directed edge:
/// `(1−α)·π(u)·A_uv / (α·d(u)·θ(u,v))`.
pub fn predicted_push_bound(
    g: &WeightedGraph,
    alpha: f64,
    thresholds: &EdgeThresholds,
    ppr: &PprVector,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    thresholds.check_graph(g)?;
    if ppr.values.len() != g.n() {
        return Err(PprError::DimensionMismatch {
            expected: g.n(),
            actual: ppr.values.len(),
        });
    }
    let mut bound = vec![0.0; g.num_directed_edges()];
    for u in 0..g.n() as NodeId {
        let d = g.degree(u);
        let pi = ppr.values[u as usize];
        for e in g.edge_range(u) {
            bound[e] = (1.0 - alpha) * pi * g.weight(e) / (alpha * d * thresholds.theta(g, e));
        }
    }
    Ok(bound)
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
        let th = EdgeThresholds::l1(&g, 0.5).unwrap();
        assert_eq!(th.theta(&g, 0), 0.25);
        let opts = EdgePushOptions {
            instrumented: true,
            ..Default::default()
        };
        let mut st = EdgePushState::new(&g, 0, 0.2, &th, opts).unwrap();
        assert!((st.global_key(0) - -0.55).abs() < 1e-15);
        assert!((st.global_key(1) - 0.25).abs() < 1e-15);
        assert_eq!(st.active_nodes(), vec![0]);
        let mut from = Vec::new();
        while let Some(ev) = st.step() {
            from.push(ev.from);
            st.check_invariants().unwrap();
        }
        assert_eq!(from, vec![0, 1, 0, 1, 0, 1]);
        assert!((st.income()[0] - 2.311744).abs() < 1e-12);
        assert!((st.income()[1] - 1.63968).abs() < 1e-12);
        let res = st.residues();
        let uv = g.edge_range(0).start;
        assert!((res[uv] - 0.2097152).abs() < 1e-12);
        assert!(res[uv] < 0.25);
        let est = st.estimate();
        assert!((est.get(0) - 0.4623488).abs() < 1e-12);
        assert!((est.get(1) - 0.327936).abs() < 1e-12);
        assert_eq!(st.accounting().edge_pushes, 6);
        assert!(st.find_candidate().is_none());
    }

    #[test]
    fn large_thresholds_mean_no_push() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 2.0), (1, 2, 1.0), (0, 2, 5.0)]).unwrap();
        let th = EdgeThresholds::uniform(&g, 1.0).unwrap();
        let (est, acc) = edgepush(&g, 0, 0.2, &th).unwrap();
        assert_eq!(acc.edge_pushes, 0);
        assert_eq!(est.to_dense(), vec![0.2, 0.0, 0.0]);
    }

    #[test]
    fn l1_formula() {
        // a=0, b=1, c=2: a–b weight 9, b–c weight 1.
        let g = WeightedGraph::from_edges(3, &[(0, 1, 9.0), (1, 2, 1.0)]).unwrap();
        let th = EdgeThresholds::l1(&g, 0.1).unwrap();
        for e in 0..g.num_directed_edges() {
            let expect = if g.weight(e) == 9.0 { 0.0375 } else { 0.0125 };
            assert!((th.theta(&g, e) - expect).abs() < 1e-15);
        }
        assert!((th.total(&g) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn additive_formula() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 3.0), (1, 2, 1.0)]).unwrap();
        let th = EdgeThresholds::additive(&g, 0.1).unwrap();
        let ab = g.edge_range(0).start; // a → b
        let expect = 0.1 * 4.0 * 3f64.sqrt() / (3f64.sqrt() + 1.0);
        assert!((th.theta(&g, ab) - expect).abs() < 1e-15);
        assert!((th.theta(&g, ab) - 0.253589).abs() < 1e-6);
        // Σ_{u ∈ N(b)} θ(u, b) = r_max · d(b)
        let into_b: f64 = (0..g.num_directed_edges())
            .filter(|&e| g.target(e) == 1)
            .map(|e| th.theta(&g, e))
            .sum();
        assert!((into_b - 0.4).abs() < 1e-15);
    }

    #[test]
    fn explicit_thresholds_validated() {
        let g = two_node();
        assert!(matches!(
            EdgeThresholds::explicit(&g, vec![0.1, 0.0]),
            Err(PprError::NonPositiveThreshold { edge: 1, .. })
        ));
        assert!(EdgeThresholds::explicit(&g, vec![0.1]).is_err());
        let other = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let th = EdgeThresholds::uniform(&other, 0.1).unwrap();
        assert!(edgepush(&g, 0, 0.2, &th).is_err());
    }

    #[test]
    fn isolated_source() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        let th = EdgeThresholds::l1(&g, 0.1).unwrap();
        let (est, acc) = edgepush(&g, 2, 0.2, &th).unwrap();
        assert!(est.isolated_source);
        assert_eq!(est.to_dense(), vec![0.0, 0.0, 1.0]);
        assert_eq!(acc.edge_pushes, 0);
    }

    #[test]
    fn push_bound_on_trace() {
        let g = two_node();
        let th = EdgeThresholds::l1(&g, 0.5).unwrap();
        let pi = PprVector {
            source: 0,
            alpha: 0.2,
            values: vec![0.2 / 0.36, 0.16 / 0.36],
        };
        let bound = predicted_push_bound(&g, 0.2, &th, &pi).unwrap();
        assert!((bound[0] - 0.8 * (0.2 / 0.36) / (0.2 * 0.25)).abs() < 1e-12);
        assert!(bound[0] > 8.88 && bound[0] < 8.89);
    }

    #[test]
    fn scan_switch_never_firing_is_bit_identical() {
        let g = two_node();
        let th = EdgeThresholds::l1(&g, 0.5).unwrap();
        let plain = edgepush(&g, 0, 0.2, &th).unwrap();
        let switched = edgepush_with_scan_switch(&g, 0, 0.2, &th, 1.0).unwrap();
        assert_eq!(plain.0, switched.0);
        assert_eq!(switched.1.scan_switches, 0);
        assert!(edgepush_with_scan_switch(&g, 0, 0.2, &th, 0.0).is_err());
    }

    #[test]
    fn additive_order_is_by_key_not_weight() {
        // Node 0 has neighbors 1 (weight 2, d(1)=2) and 2 (weight 1, d(2)=101).
        // The heavier edge has the larger initial key under the additive policy.
        let g = WeightedGraph::from_edges(
            4,
            &[(0, 1, 2.0), (0, 2, 1.0), (2, 3, 100.0)],
        )
        .unwrap();
        let th = EdgeThresholds::additive(&g, 0.01).unwrap();
        let first = th.ordered_edge(&g, 0, 0);
        assert_eq!(g.target(first), 1);
        let st = EdgePushState::new(&g, 0, 0.2, &th, EdgePushOptions::default()).unwrap();
        st.check_invariants().unwrap();
        assert!(th.order.is_some() || th.initial_key(&g, first) <= th.initial_key(&g, first + 1));
    }
}
