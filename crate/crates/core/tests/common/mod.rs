#![allow(dead_code)]

use edgeppr::synth::random_weighted_graph;
use edgeppr::{NodeId, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHAS: [f64; 3] = [0.1, 0.2, 0.5];

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// A random query: connected graph with log-uniform weights in [0.1, 100],
/// a source, α and both error parameters.
pub struct Instance {
    pub graph: WeightedGraph,
    pub source: NodeId,
    pub alpha: f64,
    pub epsilon: f64,
    pub r_max: f64,
}

pub fn instance(seed: u64, max_n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_n);
    let p = rng.random_range(0.02..0.4);
    let graph = random_weighted_graph(n, p, 0.1, 100.0, rng.random()).unwrap();
    Instance {
        source: rng.random_range(0..n as NodeId),
        alpha: ALPHAS[rng.random_range(0..ALPHAS.len())],
        epsilon: log_uniform(&mut rng, 1e-3, 0.5),
        r_max: log_uniform(&mut rng, 1e-3, 0.5),
        graph,
    }
}

pub fn instances(count: usize, max_n: usize, seed: u64) -> impl Iterator<Item = Instance> {
    (0..count as u64).map(move |i| instance(seed.wrapping_mul(1_000_003).wrapping_add(i), max_n))
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn norm_add(g: &WeightedGraph, est: &[f64], truth: &[f64]) -> f64 {
    edgeppr::eval::normalized_max_add_err(g, est, truth).unwrap()
}
