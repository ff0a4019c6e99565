//! Reference solvers: power iteration, Monte-Carlo α-random walks and a
//! push-then-walk hybrid.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, PprError, Result};
use crate::graph::{NodeId, WeightedGraph};
use crate::local_push::{LocalPushOptions, LocalPushState, PushAccounting};
use crate::oracle::PprVector;

const WALKS_PER_CHUNK: u64 = 1 << 12;

/// `π^{k+1} = α·e_s + (1−α)·P·π^k` from `π^0 = 0`, returning `π^L`.
pub fn power_method(g: &WeightedGraph, s: NodeId, alpha: f64, iterations: usize) -> Result<PprVector> {
    check_alpha(alpha)?;
    g.check_node(s)?;
    if iterations == 0 {
        return Err(PprError::InvalidParameter("power method needs L ≥ 1".into()));
    }
    let n = g.n();
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..iterations {
        next.iter_mut().for_each(|x| *x = 0.0);
        next[s as usize] = alpha;
        for u in 0..n as NodeId {
            let mass = cur[u as usize];
            if mass == 0.0 {
                continue;
            }
            if g.out_degree(u) == 0 {
                next[u as usize] += (1.0 - alpha) * mass;
                continue;
            }
            let scale = (1.0 - alpha) * mass / g.degree(u);
            for (v, w) in g.neighbors(u) {
                next[v as usize] += scale * w;
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(PprVector {
        source: s,
        alpha,
        values: cur,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkBudget {
    pub total_walks: u64,
    pub seed: u64,
}

impl WalkBudget {
    pub fn new(total_walks: u64, seed: u64) -> Result<Self> {
        if total_walks == 0 {
            return Err(PprError::InvalidParameter("walk budget must be at least 1".into()));
        }
        Ok(Self { total_walks, seed })
    }

    /// `W = ⌈(2ε_r/3 + 2)·ln(2/p_f) / (ε_r²·δ)⌉`, the usual relative-error
    /// Chernoff sizing for estimates above `δ`.
    pub fn from_error_params(delta: f64, eps_r: f64, p_f: f64, seed: u64) -> Result<Self> {
        for (name, v) in [("delta", delta), ("eps_r", eps_r), ("p_f", p_f)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(PprError::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        let w = (2.0 * eps_r / 3.0 + 2.0) * (2.0 / p_f).ln() / (eps_r * eps_r * delta);
        Self::new(w.ceil() as u64, seed)
    }
}

/// Lazily built per-node alias tables over neighbor weights.
struct Walker<'g> {
    graph: &'g WeightedGraph,
    alpha: f64,
    tables: Vec<OnceLock<Option<WeightedAliasIndex<f64>>>>,
}

impl<'g> Walker<'g> {
    fn new(graph: &'g WeightedGraph, alpha: f64) -> Self {
        Self {
            graph,
            alpha,
            tables: (0..graph.n()).map(|_| OnceLock::new()).collect(),
        }
    }

    fn table(&self, u: NodeId) -> Option<&WeightedAliasIndex<f64>> {
        self.tables[u as usize]
            .get_or_init(|| {
                let r = self.graph.edge_range(u);
                if r.is_empty() {
                    None
                } else {
                    WeightedAliasIndex::new(self.graph.weights()[r].to_vec()).ok()
                }
            })
            .as_ref()
    }

    /// Endpoint of one α-random walk from `u`. A walk at an isolated node
    /// stays there until it stops.
    fn walk<R: Rng>(&self, mut u: NodeId, rng: &mut R) -> NodeId {
        loop {
            if rng.random::<f64>() < self.alpha {
                return u;
            }
            match self.table(u) {
                Some(t) => u = self.graph.target(self.graph.edge_range(u).start + t.sample(rng)),
                None => return u,
            }
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fraction of `W` walks from `s` ending at each node. Walks run in fixed
/// chunks with one RNG stream per chunk, so the result only depends on the
/// seed and not on the thread count.
pub fn monte_carlo(g: &WeightedGraph, s: NodeId, alpha: f64, budget: WalkBudget) -> Result<PprVector> {
    check_alpha(alpha)?;
    g.check_node(s)?;
    WalkBudget::new(budget.total_walks, budget.seed)?;
    let walker = Walker::new(g, alpha);
    let w = budget.total_walks;
    let chunks = w.div_ceil(WALKS_PER_CHUNK);
    let partial: Vec<HashMap<NodeId, u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(budget.seed, c);
            let count = WALKS_PER_CHUNK.min(w - c * WALKS_PER_CHUNK);
            let mut hits = HashMap::new();
            for _ in 0..count {
                *hits.entry(walker.walk(s, &mut rng)).or_insert(0u64) += 1;
            }
            hits
        })
        .collect();
    let mut counts = vec![0u64; g.n()];
    for hits in partial {
        for (u, c) in hits {
            counts[u as usize] += c;
        }
    }
    Ok(PprVector {
        source: s,
        alpha,
        values: counts.iter().map(|&c| c as f64 / w as f64).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForaOutcome {
    pub estimate: PprVector,
    pub push: PushAccounting,
    pub walks: u64,
}

/// LocalPush with threshold `push_theta`, then `⌈r(u)·W⌉` walks from every
/// node with leftover residue, each carrying `r(u)/⌈r(u)·W⌉`.
pub fn fora_hybrid(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    push_theta: f64,
    budget: WalkBudget,
) -> Result<PprVector> {
    fora_hybrid_detailed(g, s, alpha, push_theta, budget).map(|o| o.estimate)
}

pub fn fora_hybrid_detailed(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    push_theta: f64,
    budget: WalkBudget,
) -> Result<ForaOutcome> {
    WalkBudget::new(budget.total_walks, budget.seed)?;
    let mut state = LocalPushState::new(g, s, alpha, push_theta)?;
    state.run(LocalPushOptions::default())?;
    let mut values = state.reserve();
    let residue: Vec<(NodeId, f64)> = state
        .residue()
        .into_iter()
        .enumerate()
        .filter(|&(_, r)| r > 0.0)
        .map(|(u, r)| (u as NodeId, r))
        .collect();
    let walker = Walker::new(g, alpha);
    let w = budget.total_walks as f64;
    let partial: Vec<(u64, Vec<(NodeId, f64)>)> = residue
        .par_iter()
        .map(|&(u, r)| {
            let k = (r * w).ceil().max(1.0) as u64;
            let mass = r / k as f64;
            let mut rng = stream_rng(budget.seed, u as u64);
            let mut hits: HashMap<NodeId, u64> = HashMap::new();
            for _ in 0..k {
                *hits.entry(walker.walk(u, &mut rng)).or_insert(0) += 1;
            }
            let mut out: Vec<(NodeId, f64)> =
                hits.into_iter().map(|(t, c)| (t, c as f64 * mass)).collect();
            out.sort_unstable_by_key(|&(t, _)| t);
            (k, out)
        })
        .collect();
    let mut walks = 0;
    for (k, hits) in partial {
        walks += k;
        for (t, m) in hits {
            values[t as usize] += m;
        }
    }
    Ok(ForaOutcome {
        estimate: PprVector {
            source: s,
            alpha,
            values,
        },
        push: state.accounting(),
        walks,
    })
}
