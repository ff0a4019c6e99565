//! Immutable undirected weighted graphs in CSR form.
//!
//! Every undirected edge `{u, v}` is stored twice, once per direction, so the
//! directed-edge arrays have length `2m`. A directed edge is addressed by its
//! position in those arrays (an "edge index"). Each node's adjacency list is
//! sorted by descending weight, ties broken by ascending target id.
//!
//! Alongside the arrays the graph keeps the aggregates the solvers read on
//! every query: weighted degrees `d(u)`, the total weight `‖A‖₁`, the sum of
//! `√A_uv` over all directed edges, and the per-node sums of `√A_xv`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PprError, Result};

/// Dense node index in `0..n`.
pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Merge repeated `(u, v)` pairs by summing their weights. When false,
    /// a repeated pair is rejected.
    pub dedup: bool,
    /// Silently drop zero-weight edges. When false they are rejected.
    pub drop_zero: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            dedup: true,
            drop_zero: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    m: usize,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    total_weight: f64,
    sqrt_weight_sum: f64,
    node_sqrt_sum: Vec<f64>,
    labels: Vec<u64>,
}

impl WeightedGraph {
    /// Reads a whitespace-separated `u v w` edge list. Lines starting with
    /// `#` and blank lines are skipped; a line with only `u v` gets weight 1.
    pub fn load_edge_list(path: impl AsRef<Path>, options: LoadOptions) -> Result<Self> {
        let path = path.as_ref();
        let reader = BufReader::new(File::open(path)?);
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| PprError::MalformedLine {
                path: path.to_path_buf(),
                line: lineno,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 2 && fields.len() != 3 {
                return Err(malformed("expected `u v w`"));
            }
            let u: u64 = fields[0]
                .parse()
                .map_err(|_| malformed("source is not a non-negative integer"))?;
            let v: u64 = fields[1]
                .parse()
                .map_err(|_| malformed("target is not a non-negative integer"))?;
            let w: f64 = match fields.get(2) {
                Some(tok) => tok.parse().map_err(|_| malformed("weight is not a number"))?,
                None => 1.0,
            };
            if !w.is_finite() {
                return Err(malformed("weight is not finite"));
            }
            if w < 0.0 {
                return Err(PprError::NegativeWeight {
                    path: path.to_path_buf(),
                    line: lineno,
                    weight: w,
                });
            }
            edges.push((u, v, w));
        }
        Self::from_labeled_edges(edges, options)
    }

    /// Builds a graph from `(label, label, weight)` triples. Labels are
    /// remapped to dense ids in ascending label order.
    pub fn from_labeled_edges(
        edges: impl IntoIterator<Item = (u64, u64, f64)>,
        options: LoadOptions,
    ) -> Result<Self> {
        let mut kept = Vec::new();
        for (u, v, w) in edges {
            if !w.is_finite() || w < 0.0 {
                return Err(PprError::InvalidParameter(format!(
                    "edge ({u}, {v}) has invalid weight {w}"
                )));
            }
            if u == v {
                continue;
            }
            if w == 0.0 {
                if options.drop_zero {
                    continue;
                }
                return Err(PprError::InvalidParameter(format!(
                    "edge ({u}, {v}) has zero weight"
                )));
            }
            kept.push((u.min(v), u.max(v), w));
        }
        if kept.is_empty() {
            return Err(PprError::EmptyGraph);
        }

        let mut labels: Vec<u64> = kept.iter().flat_map(|&(u, v, _)| [u, v]).collect();
        labels.sort_unstable();
        labels.dedup();
        let index: HashMap<u64, NodeId> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as NodeId))
            .collect();

        let mut dense: Vec<(NodeId, NodeId, f64)> = kept
            .into_iter()
            .map(|(u, v, w)| (index[&u], index[&v], w))
            .collect();
        // Stable sort keeps file order among duplicates so merged sums are
        // reproducible.
        dense.sort_by_key(|&(u, v, _)| (u, v));
        let mut merged: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(dense.len());
        for (u, v, w) in dense {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => {
                    if !options.dedup {
                        return Err(PprError::InvalidParameter(format!(
                            "duplicate edge ({}, {})",
                            labels[u as usize], labels[v as usize]
                        )));
                    }
                    last.2 += w;
                }
                _ => merged.push((u, v, w)),
            }
        }
        Ok(Self::from_simple_edges(labels, &merged))
    }

    /// Builds a graph on nodes `0..n` from simple undirected edges
    /// (no self-loops, no duplicates, positive weights). Nodes without
    /// edges are kept as isolated nodes.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(PprError::NodeOutOfRange {
                    node: u.max(v),
                    n,
                });
            }
            if u == v {
                return Err(PprError::InvalidParameter(format!("self-loop at {u}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(PprError::InvalidParameter(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(PprError::InvalidParameter(format!(
                    "duplicate edge ({u}, {v})"
                )));
            }
        }
        if edges.is_empty() {
            return Err(PprError::EmptyGraph);
        }
        Ok(Self::from_simple_edges((0..n as u64).collect(), edges))
    }

    fn from_simple_edges(labels: Vec<u64>, edges: &[(NodeId, NodeId, f64)]) -> Self {
        let n = labels.len();
        let mut counts = vec![0usize; n + 1];
        for &(u, v, _) in edges {
            counts[u as usize + 1] += 1;
            counts[v as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut targets = vec![0 as NodeId; 2 * edges.len()];
        let mut weights = vec![0.0; 2 * edges.len()];
        for &(u, v, w) in edges {
            for (a, b) in [(u, v), (v, u)] {
                let slot = fill[a as usize];
                targets[slot] = b;
                weights[slot] = w;
                fill[a as usize] += 1;
            }
        }
        let mut row: Vec<(NodeId, f64)> = Vec::new();
        for u in 0..n {
            let range = offsets[u]..offsets[u + 1];
            row.clear();
            row.extend(range.clone().map(|e| (targets[e], weights[e])));
            sort_row(&mut row);
            for (e, &(t, w)) in range.zip(row.iter()) {
                targets[e] = t;
                weights[e] = w;
            }
        }
        Self::from_csr_parts(labels, offsets, targets, weights)
    }

    /// Assembles a graph from CSR arrays whose rows are already symmetric and
    /// sorted by descending weight. Used by dense generators where building an
    /// intermediate edge list would double peak memory.
    pub(crate) fn from_csr_parts(
        labels: Vec<u64>,
        offsets: Vec<usize>,
        targets: Vec<NodeId>,
        weights: Vec<f64>,
    ) -> Self {
        let n = labels.len();
        debug_assert_eq!(offsets.len(), n + 1);
        debug_assert_eq!(targets.len() % 2, 0);
        let mut degrees = vec![0.0; n];
        let mut node_sqrt_sum = vec![0.0; n];
        for u in 0..n {
            let ws = &weights[offsets[u]..offsets[u + 1]];
            degrees[u] = ws.iter().sum();
            node_sqrt_sum[u] = ws.iter().map(|w| w.sqrt()).sum();
        }
        let total_weight = degrees.iter().sum();
        let sqrt_weight_sum = node_sqrt_sum.iter().sum();
        Self {
            m: targets.len() / 2,
            offsets,
            targets,
            weights,
            degrees,
            total_weight,
            sqrt_weight_sum,
            node_sqrt_sum,
            labels,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of directed edges, `|Ē| = 2m`.
    pub fn num_directed_edges(&self) -> usize {
        self.targets.len()
    }

    pub fn contains(&self, u: NodeId) -> bool {
        (u as usize) < self.n()
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(PprError::NodeOutOfRange {
                node: u,
                n: self.n(),
            })
        }
    }

    /// Weighted degree `d(u)`. Panics if `u` is out of range.
    #[inline]
    pub fn degree(&self, u: NodeId) -> f64 {
        self.degrees[u as usize]
    }

    pub fn checked_degree(&self, u: NodeId) -> Result<f64> {
        self.check_node(u)?;
        Ok(self.degree(u))
    }

    /// Number of neighbors `n(u)`.
    #[inline]
    pub fn out_degree(&self, u: NodeId) -> usize {
        self.offsets[u as usize + 1] - self.offsets[u as usize]
    }

    /// Directed-edge indices of `u`'s adjacency list.
    #[inline]
    pub fn edge_range(&self, u: NodeId) -> Range<usize> {
        self.offsets[u as usize]..self.offsets[u as usize + 1]
    }

    #[inline]
    pub fn target(&self, e: usize) -> NodeId {
        self.targets[e]
    }

    #[inline]
    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    /// `(neighbor, weight)` pairs in descending-weight order.
    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.edge_range(u).map(move |e| (self.targets[e], self.weights[e]))
    }

    pub fn checked_neighbors(
        &self,
        u: NodeId,
    ) -> Result<impl Iterator<Item = (NodeId, f64)> + '_> {
        self.check_node(u)?;
        Ok(self.neighbors(u))
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// `‖A‖₁`, the sum of weights over all directed edges.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// `Σ √A_uv` over all directed edges.
    pub fn sqrt_weight_sum(&self) -> f64 {
        self.sqrt_weight_sum
    }

    /// `Σ_{x ∈ N(v)} √A_xv`.
    #[inline]
    pub fn node_sqrt_sum(&self, v: NodeId) -> f64 {
        self.node_sqrt_sum[v as usize]
    }

    /// Original label of a dense node id.
    pub fn label(&self, u: NodeId) -> u64 {
        self.labels[u as usize]
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// Undirected edges `(u, v, w)` with `u < v`, sorted by `(u, v)`.
    pub fn canonical_edges(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut edges = Vec::with_capacity(self.m);
        for u in 0..self.n() as NodeId {
            for (v, w) in self.neighbors(u) {
                if u < v {
                    edges.push((u, v, w));
                }
            }
        }
        edges.sort_unstable_by_key(|&(u, v, _)| (u, v));
        edges
    }

    /// Writes the canonical edge list using original labels. Weights are
    /// printed in shortest round-trip form so reloading is bit-exact.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, v, w) in self.canonical_edges() {
            writeln!(out, "{} {} {}", self.label(u), self.label(v), w)?;
        }
        Ok(())
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        self.write_edge_list(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Full structural check: symmetry, positivity, no self-loops or
    /// duplicates, sort order and aggregate consistency. Quadratic-free but
    /// allocates a hash map over all directed edges.
    pub fn validate(&self) -> Result<()> {
        let violation = |msg: String| Err(PprError::InvariantViolation(msg));
        let mut lookup: HashMap<(NodeId, NodeId), f64> = HashMap::with_capacity(self.targets.len());
        for u in 0..self.n() as NodeId {
            let mut prev: Option<(NodeId, f64)> = None;
            let mut sum = 0.0;
            for (v, w) in self.neighbors(u) {
                if v == u {
                    return violation(format!("self-loop at {u}"));
                }
                if !(w > 0.0) {
                    return violation(format!("non-positive weight on ({u}, {v})"));
                }
                if let Some((pv, pw)) = prev {
                    if pw < w || (pw == w && pv >= v) {
                        return violation(format!("adjacency of {u} not sorted"));
                    }
                }
                if lookup.insert((u, v), w).is_some() {
                    return violation(format!("duplicate edge ({u}, {v})"));
                }
                prev = Some((v, w));
                sum += w;
            }
            if !rel_close(sum, self.degree(u), 1e-12) {
                return violation(format!("degree of {u} inconsistent"));
            }
        }
        for (&(u, v), &w) in &lookup {
            if lookup.get(&(v, u)) != Some(&w) {
                return violation(format!("edge ({u}, {v}) has no symmetric twin"));
            }
        }
        let degree_sum: f64 = self.degrees.iter().sum();
        if !rel_close(degree_sum, self.total_weight, 1e-12) {
            return violation("total weight differs from degree sum".into());
        }
        if self.targets.len() != 2 * self.m {
            return violation("|Ē| != 2m".into());
        }
        Ok(())
    }
}

pub(crate) fn sort_row(row: &mut [(NodeId, f64)]) {
    row.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SourceMode {
    Uniform,
    #[default]
    DegreeProportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceDistribution {
    pub mode: SourceMode,
    pub seed: u64,
}

/// Draws query sources. Nodes of degree zero are never returned.
pub fn sample_sources(
    g: &WeightedGraph,
    dist: SourceDistribution,
    count: usize,
) -> Result<Vec<NodeId>> {
    if count == 0 {
        return Err(PprError::InvalidParameter(
            "source count must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(dist.seed);
    match dist.mode {
        SourceMode::DegreeProportional => {
            let index = WeightedIndex::new(g.degrees()).map_err(|_| PprError::EmptyGraph)?;
            Ok((0..count)
                .map(|_| index.sample(&mut rng) as NodeId)
                .collect())
        }
        SourceMode::Uniform => {
            let eligible: Vec<NodeId> = (0..g.n() as NodeId)
                .filter(|&u| g.out_degree(u) > 0)
                .collect();
            if eligible.is_empty() {
                return Err(PprError::EmptyGraph);
            }
            Ok((0..count)
                .map(|_| eligible[rng.random_range(0..eligible.len())])
                .collect())
        }
    }
}
