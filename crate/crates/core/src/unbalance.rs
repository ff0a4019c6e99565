//! Edge-weight unbalancedness: how far the `√A` vectors are from uniform.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, check_unit_open, PprError, Result};
use crate::graph::{NodeId, WeightedGraph};

/// Default prefix fractions reported in [`UnbalanceReport::ab_profile`].
pub const DEFAULT_AB_GRID: [f64; 5] = [0.01, 0.1, 0.25, 0.5, 1.0];

/// `(Σ_{⟨u,v⟩∈Ē} √A_uv)² / (2m·‖A‖₁)`.
pub fn cos2_phi(g: &WeightedGraph) -> Result<f64> {
    if g.m() == 0 {
        return Err(PprError::EmptyGraph);
    }
    let s = g.sqrt_weight_sum();
    Ok(s * s / (g.num_directed_edges() as f64 * g.total_weight()))
}

/// `(Σ_{x∈N(v)} √A_xv)² / (n(v)·d(v))`; 1 for degree-one nodes.
pub fn cos2_phi_v(g: &WeightedGraph, v: NodeId) -> Result<f64> {
    g.check_node(v)?;
    let n_v = g.out_degree(v);
    if n_v == 0 {
        return Err(PprError::IsolatedNode(v));
    }
    let s = g.node_sqrt_sum(v);
    Ok(s * s / (n_v as f64 * g.degree(v)))
}

/// `Σ_v n(v)·cos²φ_v / (2m)`, skipping isolated nodes.
pub fn mean_cos2_phi_v(g: &WeightedGraph) -> Result<f64> {
    if g.m() == 0 {
        return Err(PprError::EmptyGraph);
    }
    let total: f64 = (0..g.n() as NodeId)
        .into_par_iter()
        .filter(|&v| g.out_degree(v) > 0)
        .map(|v| {
            let s = g.node_sqrt_sum(v);
            s * s / g.degree(v)
        })
        .sum();
    Ok(total / g.num_directed_edges() as f64)
}

/// `(1−α)/(2m)·Σ_v n(v)·cos²φ_v`.
pub fn mean_superiority_factor(g: &WeightedGraph, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((1.0 - alpha) * mean_cos2_phi_v(g)?)
}

/// `(√(ab) + √((1−a)(1−b)))²`.
pub fn gamma(a: f64, b: f64) -> f64 {
    let r = (a * b).sqrt() + ((1.0 - a) * (1.0 - b)).max(0.0).sqrt();
    r * r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeUnbalance {
    pub node: NodeId,
    /// Realized prefix fraction `⌈a·n(v)⌉ / n(v)`.
    pub a: f64,
    /// Share of `d(v)` carried by the `⌈a·n(v)⌉` heaviest edges.
    pub b: f64,
    pub gamma: f64,
    /// `Σ_x √A_xv ≤ √γ·√(n(v)d(v)) + 1e-9`.
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbUnbalance {
    pub a_fraction: f64,
    pub nodes: Vec<NodeUnbalance>,
    pub gamma_max: f64,
    pub all_hold: bool,
}

/// Per-node `(a, b)` profile at prefix fraction `a_fraction ∈ (0, 1]`.
///
/// Because the prefix size is rounded up, the bound is evaluated with the
/// realized fraction `⌈a·n(v)⌉/n(v)`, which is the split the inequality is
/// actually about.
pub fn ab_unbalance(g: &WeightedGraph, a_fraction: f64) -> Result<AbUnbalance> {
    if !(a_fraction > 0.0 && a_fraction <= 1.0) {
        return Err(PprError::InvalidParameter(format!(
            "a must lie in (0, 1], got {a_fraction}"
        )));
    }
    let nodes: Vec<NodeUnbalance> = (0..g.n() as NodeId)
        .into_par_iter()
        .filter(|&v| g.out_degree(v) > 0)
        .map(|v| {
            let n_v = g.out_degree(v);
            let k = ((a_fraction * n_v as f64).ceil() as usize).clamp(1, n_v);
            // Rows are sorted by descending weight.
            let r = g.edge_range(v);
            let d = g.degree(v);
            let heavy: f64 = g.weights()[r.start..r.start + k].iter().sum();
            let b = (heavy / d).min(1.0);
            let a = k as f64 / n_v as f64;
            let gm = gamma(a, b);
            let lhs = g.node_sqrt_sum(v);
            let rhs = gm.sqrt() * (n_v as f64 * d).sqrt();
            NodeUnbalance {
                node: v,
                a,
                b,
                gamma: gm,
                bound_holds: lhs <= rhs + 1e-9,
            }
        })
        .collect();
    let gamma_max = nodes.iter().map(|x| x.gamma).fold(0.0, f64::max);
    let all_hold = nodes.iter().all(|x| x.bound_holds);
    Ok(AbUnbalance {
        a_fraction,
        nodes,
        gamma_max,
        all_hold,
    })
}

/// Expected edge-push cost under the `ℓ1` policy for a degree-proportional
/// source: `(1−α)·(Σ√A)² / (α·ε·‖A‖₁)`.
pub fn expected_l1_cost(g: &WeightedGraph, alpha: f64, epsilon: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_unit_open("epsilon", epsilon)?;
    if g.m() == 0 {
        return Err(PprError::EmptyGraph);
    }
    let s = g.sqrt_weight_sum();
    Ok((1.0 - alpha) * s * s / (alpha * epsilon * g.total_weight()))
}

/// Checks `expected_l1_cost ≤ γ_max·2m/(αε)` for prefix fraction `a`.
pub fn check_gamma_cost_bound(g: &WeightedGraph, alpha: f64, epsilon: f64, a: f64) -> Result<bool> {
    let cost = expected_l1_cost(g, alpha, epsilon)?;
    let ab = ab_unbalance(g, a)?;
    let bound = ab.gamma_max * g.num_directed_edges() as f64 / (alpha * epsilon);
    Ok(cost <= bound * (1.0 + 1e-12))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbPoint {
    pub a: f64,
    /// Mean of the per-node `b`.
    pub mean_b: f64,
    pub gamma_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbalanceReport {
    pub n: usize,
    pub m: usize,
    pub cos2_phi: f64,
    /// `cos²φ_v` per node; `None` for isolated nodes.
    pub per_node_cos2: Vec<Option<f64>>,
    /// `Σ_v n(v)·cos²φ_v / (2m)`.
    pub mean_factor: f64,
    pub ab_profile: Vec<AbPoint>,
}

pub fn unbalance_report(g: &WeightedGraph) -> Result<UnbalanceReport> {
    let per_node_cos2 = (0..g.n() as NodeId)
        .map(|v| cos2_phi_v(g, v).ok())
        .collect();
    let ab_profile = DEFAULT_AB_GRID
        .iter()
        .map(|&a| {
            let ab = ab_unbalance(g, a)?;
            let mean_b = ab.nodes.iter().map(|x| x.b).sum::<f64>() / ab.nodes.len().max(1) as f64;
            Ok(AbPoint {
                a,
                mean_b,
                gamma_max: ab.gamma_max,
            })
        })
        .collect::<Result<_>>()?;
    Ok(UnbalanceReport {
        n: g.n(),
        m: g.m(),
        cos2_phi: cos2_phi(g)?,
        per_node_cos2,
        mean_factor: mean_cos2_phi_v(g)?,
        ab_profile,
    })
}
