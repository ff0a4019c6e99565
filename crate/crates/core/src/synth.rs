//! Synthetic and derived weighted graphs.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PprError, Result};
use crate::graph::{sort_row, LoadOptions, NodeId, WeightedGraph};

pub const DEFAULT_AFFINITY_CAP: usize = 20_000;
const AFFINITY_BLOCK: usize = 256;

/// Re-weights every edge by the number of triangles containing it. Input
/// weights are ignored; edges in no triangle are dropped and the original
/// labels are kept. Fails with [`PprError::EmptyGraph`] when no triangle
/// exists.
pub fn motif_weight(g: &WeightedGraph) -> Result<WeightedGraph> {
    let adj: Vec<Vec<NodeId>> = (0..g.n() as NodeId)
        .map(|u| {
            let mut row: Vec<NodeId> = g.neighbors(u).map(|(v, _)| v).collect();
            row.sort_unstable();
            row
        })
        .collect();
    let edges: Vec<(u64, u64, f64)> = (0..g.n())
        .into_par_iter()
        .flat_map_iter(|u| {
            let adj = &adj;
            adj[u]
                .iter()
                .filter(move |&&v| (v as usize) > u)
                .map(move |&v| {
                    let t = sorted_intersection(&adj[u], &adj[v as usize]);
                    (g.label(u as NodeId), g.label(v), t as f64)
                })
        })
        .collect();
    WeightedGraph::from_labeled_edges(edges, LoadOptions::default())
}

fn sorted_intersection(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Bandwidth {
    /// `σ²` is the pooled per-coordinate sample variance of the points.
    EmpiricalVariance,
    /// `σ² = c·d²·σ_N²`; `d` defaults to the dimension `κ`.
    Scaled { c: f64, d: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityConfig {
    pub n_points: usize,
    pub dim: usize,
    pub coord_variance: f64,
    pub bandwidth: Bandwidth,
    pub seed: u64,
    pub cap: usize,
}

impl AffinityConfig {
    pub fn new(n_points: usize, dim: usize, coord_variance: f64, c: f64, seed: u64) -> Self {
        Self {
            n_points,
            dim,
            coord_variance,
            bandwidth: Bandwidth::Scaled { c, d: None },
            seed,
            cap: DEFAULT_AFFINITY_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PprError::InvalidParameter(msg));
        if self.n_points < 2 {
            return bad(format!("need at least 2 points, got {}", self.n_points));
        }
        if self.n_points > self.cap {
            return Err(PprError::TooLarge {
                n: self.n_points,
                limit: self.cap,
            });
        }
        if self.dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        if !(self.coord_variance > 0.0) {
            return bad(format!("coordinate variance must be positive, got {}", self.coord_variance));
        }
        if let Bandwidth::Scaled { c, d } = self.bandwidth {
            if !(c > 0.0) || d.is_some_and(|d| !(d > 0.0)) {
                return bad("bandwidth scale must be positive".into());
            }
        }
        Ok(())
    }
}

/// Points with i.i.d. `N(0, σ_N²)` coordinates, row-major.
pub fn affinity_points(cfg: &AffinityConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.coord_variance.sqrt())
        .map_err(|e| PprError::InvalidParameter(e.to_string()))?;
    Ok((0..cfg.n_points * cfg.dim).map(|_| normal.sample(&mut rng)).collect())
}

/// `σ²` used by [`affinity_graph`] for the given points.
pub fn affinity_bandwidth(cfg: &AffinityConfig, points: &[f64]) -> f64 {
    match cfg.bandwidth {
        Bandwidth::Scaled { c, d } => {
            let d = d.unwrap_or(cfg.dim as f64);
            c * d * d * cfg.coord_variance
        }
        Bandwidth::EmpiricalVariance => {
            let k = cfg.dim;
            let n = cfg.n_points as f64;
            let mut ss = 0.0;
            for j in 0..k {
                let mean = points.iter().skip(j).step_by(k).sum::<f64>() / n;
                ss += points
                    .iter()
                    .skip(j)
                    .step_by(k)
                    .map(|x| (x - mean) * (x - mean))
                    .sum::<f64>();
            }
            ss / (n * k as f64 - 1.0)
        }
    }
}

/// Complete graph with `A_ij = exp(−‖x_i − x_j‖² / 2σ²)`. Pairs whose weight
/// underflows to zero are left out. Rows are built block by block straight
/// into CSR arrays.
pub fn affinity_graph(cfg: &AffinityConfig) -> Result<WeightedGraph> {
    let points = affinity_points(cfg)?;
    let sigma2 = affinity_bandwidth(cfg, &points);
    if !(sigma2 > 0.0) {
        return Err(PprError::InvalidParameter(format!("degenerate bandwidth {sigma2}")));
    }
    let n = cfg.n_points;
    let k = cfg.dim;
    let point = |i: usize| &points[i * k..(i + 1) * k];
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0usize);
    let mut targets: Vec<NodeId> = Vec::with_capacity(n * (n - 1));
    let mut weights: Vec<f64> = Vec::with_capacity(n * (n - 1));
    for block in (0..n).collect::<Vec<_>>().chunks(AFFINITY_BLOCK) {
        let rows: Vec<Vec<(NodeId, f64)>> = block
            .par_iter()
            .map(|&i| {
                let xi = point(i);
                let mut row: Vec<(NodeId, f64)> = (0..n)
                    .filter(|&j| j != i)
                    .filter_map(|j| {
                        let d2: f64 = xi.iter().zip(point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                        let w = (-d2 / (2.0 * sigma2)).exp();
                        (w > 0.0).then_some((j as NodeId, w))
                    })
                    .collect();
                sort_row(&mut row);
                row
            })
            .collect();
        for row in rows {
            targets.extend(row.iter().map(|&(t, _)| t));
            weights.extend(row.iter().map(|&(_, w)| w));
            offsets.push(targets.len());
        }
    }
    if targets.is_empty() {
        return Err(PprError::EmptyGraph);
    }
    targets.shrink_to_fit();
    weights.shrink_to_fit();
    Ok(WeightedGraph::from_csr_parts((0..n as u64).collect(), offsets, targets, weights))
}

/// Star with hub `0` and leaves `1..=n`: edge `0–1` has weight `b`, the other
/// `n−1` edges share `1−b` equally.
pub fn unbalanced_star_graph(n: usize, b: f64) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(PprError::InvalidParameter(format!("star needs n ≥ 3, got {n}")));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(PprError::InvalidParameter(format!("b must lie in (0, 1), got {b}")));
    }
    let light = (1.0 - b) / (n - 1) as f64;
    let edges: Vec<(NodeId, NodeId, f64)> = (1..=n as NodeId)
        .map(|v| (0, v, if v == 1 { b } else { light }))
        .collect();
    WeightedGraph::from_edges(n + 1, &edges)
}

/// The star of [`unbalanced_star_graph`] plus a pendant node `n+1` attached
/// to the heavy leaf with weight `tail`.
pub fn unbalanced_star_with_tail(n: usize, b: f64, tail: f64) -> Result<WeightedGraph> {
    let star = unbalanced_star_graph(n, b)?;
    let mut edges = star.canonical_edges();
    edges.push((1, n as NodeId + 1, tail));
    WeightedGraph::from_edges(n + 2, &edges)
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn check_weight_range(lo: f64, hi: f64) -> Result<()> {
    if lo > 0.0 && hi >= lo && hi.is_finite() {
        Ok(())
    } else {
        Err(PprError::InvalidParameter(format!("bad weight range [{lo}, {hi}]")))
    }
}

/// Connected random graph: a random recursive tree plus every other pair with
/// probability `p`, weights log-uniform in `[lo, hi]`.
pub fn random_weighted_graph(n: usize, p: f64, lo: f64, hi: f64, seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(PprError::InvalidParameter(format!("need n ≥ 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(PprError::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    check_weight_range(lo, hi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parent: Vec<usize> = (1..n).map(|v| rng.random_range(0..v)).collect();
    let mut edges = Vec::new();
    for v in 1..n {
        for u in 0..v {
            if parent[v - 1] == u || rng.random::<f64>() < p {
                edges.push((u as NodeId, v as NodeId, log_uniform(&mut rng, lo, hi)));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges)
}

/// `K_n` with unit weights, or log-uniform weights in `[lo, hi]` when a
/// range is given.
pub fn complete_graph(n: usize, weights: Option<(f64, f64)>, seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(PprError::InvalidParameter(format!("need n ≥ 2, got {n}")));
    }
    if let Some((lo, hi)) = weights {
        check_weight_range(lo, hi)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            let w = weights.map_or(1.0, |(lo, hi)| log_uniform(&mut rng, lo, hi));
            edges.push((u, v, w));
        }
    }
    WeightedGraph::from_edges(n, &edges)
}

/// Unweighted planted-partition graph: `blocks` equal communities, edge
/// probability `p_in` inside and `p_out` across. Isolated nodes are dropped.
pub fn planted_partition(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Result<WeightedGraph> {
    if blocks == 0 || blocks > n {
        return Err(PprError::InvalidParameter(format!("bad block count {blocks}")));
    }
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(PprError::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let block = |u: usize| u * blocks / n;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block(u) == block(v) { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u as u64, v as u64, 1.0));
            }
        }
    }
    WeightedGraph::from_labeled_edges(edges, LoadOptions::default())
}

/// Textual generator spec, `kind:key=value,...`:
///
/// * `unbalanced-star:n=4,b=0.7`
/// * `affinity:n=1000,kappa=13,var=50,c=1,seed=7`
/// * `random:n=64,p=0.1,lo=0.1,hi=100,seed=3`
/// * `complete:n=32[,lo=..,hi=..,seed=..]`
/// * `planted:n=1000,blocks=20,p_in=0.3,p_out=0.002,seed=1`
/// * `motif:<edge-list path>` or `motif-planted:<planted parameters>`
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    UnbalancedStar { n: usize, b: f64 },
    Affinity(AffinityConfig),
    Random { n: usize, p: f64, lo: f64, hi: f64, seed: u64 },
    Complete { n: usize, weights: Option<(f64, f64)>, seed: u64 },
    Planted { n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64 },
    Motif(Box<MotifSource>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MotifSource {
    File(String),
    Generated(GeneratorSpec),
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<WeightedGraph> {
        match self {
            GeneratorSpec::UnbalancedStar { n, b } => unbalanced_star_graph(*n, *b),
            GeneratorSpec::Affinity(cfg) => affinity_graph(cfg),
            GeneratorSpec::Random { n, p, lo, hi, seed } => random_weighted_graph(*n, *p, *lo, *hi, *seed),
            GeneratorSpec::Complete { n, weights, seed } => complete_graph(*n, *weights, *seed),
            GeneratorSpec::Planted {
                n,
                blocks,
                p_in,
                p_out,
                seed,
            } => planted_partition(*n, *blocks, *p_in, *p_out, *seed),
            GeneratorSpec::Motif(src) => {
                let base = match src.as_ref() {
                    MotifSource::File(path) => WeightedGraph::load_edge_list(path, LoadOptions::default())?,
                    MotifSource::Generated(spec) => spec.generate()?,
                };
                motif_weight(&base)
            }
        }
    }
}

struct Params<'a> {
    kind: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    fn parse(kind: &'a str, body: &'a str) -> Result<Self> {
        let pairs = body
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|kv| {
                kv.split_once('=').ok_or_else(|| {
                    PprError::InvalidParameter(format!("{kind}: expected key=value, got '{kv}'"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, pairs })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.pairs.iter().find(|(k, _)| *k == key) {
            None => Ok(None),
            Some((_, v)) => v.parse().map(Some).map_err(|_| {
                PprError::InvalidParameter(format!("{}: cannot parse {key}='{v}'", self.kind))
            }),
        }
    }

    fn req<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| PprError::InvalidParameter(format!("{}: missing {key}", self.kind)))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.pairs.iter().find(|(k, _)| !allowed.contains(k)) {
            Some((k, _)) => Err(PprError::InvalidParameter(format!("{}: unknown key {k}", self.kind))),
            None => Ok(()),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = PprError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        if kind == "motif" {
            return Ok(GeneratorSpec::Motif(Box::new(MotifSource::File(body.to_string()))));
        }
        if let Some(inner) = kind.strip_prefix("motif-") {
            let spec = format!("{inner}:{body}").parse()?;
            return Ok(GeneratorSpec::Motif(Box::new(MotifSource::Generated(spec))));
        }
        let p = Params::parse(kind, body)?;
        let spec = match kind {
            "unbalanced-star" => {
                p.check_keys(&["n", "b"])?;
                let n = p.req("n")?;
                let b = p.get("b")?.unwrap_or(1.0 - 1.0 / n as f64);
                GeneratorSpec::UnbalancedStar { n, b }
            }
            "affinity" => {
                p.check_keys(&["n", "kappa", "var", "c", "d", "seed", "bandwidth", "cap"])?;
                let bandwidth = match p.get::<String>("bandwidth")?.as_deref() {
                    None | Some("scaled") => Bandwidth::Scaled {
                        c: p.get("c")?.unwrap_or(1.0),
                        d: p.get("d")?,
                    },
                    Some("empirical") => Bandwidth::EmpiricalVariance,
                    Some(other) => {
                        return Err(PprError::InvalidParameter(format!("unknown bandwidth {other}")))
                    }
                };
                GeneratorSpec::Affinity(AffinityConfig {
                    n_points: p.req("n")?,
                    dim: p.get("kappa")?.unwrap_or(1),
                    coord_variance: p.get("var")?.unwrap_or(1.0),
                    bandwidth,
                    seed: p.get("seed")?.unwrap_or(0),
                    cap: p.get("cap")?.unwrap_or(DEFAULT_AFFINITY_CAP),
                })
            }
            "random" => {
                p.check_keys(&["n", "p", "lo", "hi", "seed"])?;
                GeneratorSpec::Random {
                    n: p.req("n")?,
                    p: p.get("p")?.unwrap_or(0.1),
                    lo: p.get("lo")?.unwrap_or(0.1),
                    hi: p.get("hi")?.unwrap_or(100.0),
                    seed: p.get("seed")?.unwrap_or(0),
                }
            }
            "complete" => {
                p.check_keys(&["n", "lo", "hi", "seed"])?;
                let weights = match (p.get("lo")?, p.get("hi")?) {
                    (Some(lo), Some(hi)) => Some((lo, hi)),
                    (None, None) => None,
                    _ => return Err(PprError::InvalidParameter("complete: give both lo and hi".into())),
                };
                GeneratorSpec::Complete {
                    n: p.req("n")?,
                    weights,
                    seed: p.get("seed")?.unwrap_or(0),
                }
            }
            "planted" => {
                p.check_keys(&["n", "blocks", "p_in", "p_out", "seed"])?;
                GeneratorSpec::Planted {
                    n: p.req("n")?,
                    blocks: p.req("blocks")?,
                    p_in: p.req("p_in")?,
                    p_out: p.req("p_out")?,
                    seed: p.get("seed")?.unwrap_or(0),
                }
            }
            other => return Err(PprError::InvalidParameter(format!("unknown generator '{other}'"))),
        };
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unbalance::cos2_phi;

    #[test]
    fn motif_small_cases() {
        let tri = WeightedGraph::from_edges(3, &[(0, 1, 5.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let w = motif_weight(&tri).unwrap();
        assert!(w.weights().iter().all(|&x| x == 1.0));
        let k4 = complete_graph(4, None, 0).unwrap();
        let w = motif_weight(&k4).unwrap();
        assert_eq!(w.m(), 6);
        assert!(w.weights().iter().all(|&x| x == 2.0));
        let path = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(matches!(motif_weight(&path), Err(PprError::EmptyGraph)));
    }

    #[test]
    fn affinity_basics() {
        let cfg = AffinityConfig::new(50, 3, 2.0, 1.0, 9);
        let g = affinity_graph(&cfg).unwrap();
        g.validate().unwrap();
        assert_eq!(g.m(), 50 * 49 / 2);
        assert!(g.weights().iter().all(|&w| w > 0.0 && w <= 1.0));
        let again = affinity_graph(&cfg).unwrap();
        assert_eq!(g.weights(), again.weights());
        assert_eq!(g.targets(), again.targets());
    }

    #[test]
    fn affinity_bandwidth_formula() {
        let cfg = AffinityConfig::new(10, 13, 50.0, 1.0, 0);
        assert_eq!(affinity_bandwidth(&cfg, &[]), 169.0 * 50.0);
        let mut too_big = cfg;
        too_big.cap = 5;
        assert!(matches!(affinity_graph(&too_big), Err(PprError::TooLarge { .. })));
    }

    #[test]
    fn star_construction() {
        let g = unbalanced_star_graph(4, 0.7).unwrap();
        assert_eq!(g.m(), 4);
        let hub: Vec<f64> = g.neighbors(0).map(|(_, w)| w).collect();
        assert_eq!(hub[0], 0.7);
        for w in &hub[1..] {
            assert!((w - 0.1).abs() < 1e-15);
        }
        let n = 10_000;
        let big = unbalanced_star_graph(n, 1.0 - 1.0 / n as f64).unwrap();
        assert!(cos2_phi(&big).unwrap() <= 10.0 / n as f64);
        let uniform = unbalanced_star_graph(5, 0.2).unwrap();
        assert!((cos2_phi(&uniform).unwrap() - 1.0).abs() < 1e-12);
        assert!(unbalanced_star_graph(2, 0.5).is_err());
        assert_eq!(unbalanced_star_with_tail(4, 0.7, 1.0).unwrap().m(), 5);
    }

    #[test]
    fn random_graphs_are_connected_and_reproducible() {
        let g = random_weighted_graph(40, 0.05, 0.1, 100.0, 4).unwrap();
        assert!((0..40).all(|u| g.out_degree(u) > 0));
        let h = random_weighted_graph(40, 0.05, 0.1, 100.0, 4).unwrap();
        assert_eq!(g.canonical_edges(), h.canonical_edges());
    }

    #[test]
    fn spec_parsing() {
        let s: GeneratorSpec = "unbalanced-star:n=4,b=0.7".parse().unwrap();
        assert_eq!(s, GeneratorSpec::UnbalancedStar { n: 4, b: 0.7 });
        let s: GeneratorSpec = "motif-planted:n=60,blocks=3,p_in=0.5,p_out=0.01,seed=2".parse().unwrap();
        assert!(s.generate().unwrap().m() > 0);
        assert!("affinity:n=10,foo=1".parse::<GeneratorSpec>().is_err());
        assert!("nope:n=3".parse::<GeneratorSpec>().is_err());
    }
}
