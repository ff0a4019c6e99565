//! Exact SSPPR vectors for small graphs.
//!
//! `exact_ppr` solves `(I − (1−α)P) π = α e_s` with a dense LU factorisation,
//! where `P = A D⁻¹` is the column-stochastic transition matrix. An isolated
//! node keeps its walk in place, so its column of `P` is `e_u` and its PPR
//! vector is the indicator `e_u`.
//!
//! `ground_truth` is the independent route: 100 rounds of power iteration.
//! The two are cross-checked in tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::baselines::power_method;
use crate::error::{check_alpha, PprError, Result};
use crate::graph::{NodeId, WeightedGraph};

pub const DEFAULT_DENSE_LIMIT: usize = 2048;
pub const GROUND_TRUTH_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PprVector {
    pub source: NodeId,
    pub alpha: f64,
    pub values: Vec<f64>,
}

impl PprVector {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// All-pairs PPR: row `u` is `π_u(·)`.
#[derive(Debug, Clone)]
pub struct PprMatrix {
    pub alpha: f64,
    n: usize,
    data: Vec<f64>,
}

impl PprMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, u: NodeId) -> &[f64] {
        let start = u as usize * self.n;
        &self.data[start..start + self.n]
    }

    /// `π_u(t)`.
    #[inline]
    pub fn get(&self, u: NodeId, t: NodeId) -> f64 {
        self.data[u as usize * self.n + t as usize]
    }

    pub fn vector(&self, u: NodeId) -> PprVector {
        PprVector {
            source: u,
            alpha: self.alpha,
            values: self.row(u).to_vec(),
        }
    }
}

fn system_matrix(g: &WeightedGraph, alpha: f64) -> DMatrix<f64> {
    let n = g.n();
    let mut m = DMatrix::<f64>::identity(n, n);
    for u in 0..n as NodeId {
        let d = g.degree(u);
        if g.out_degree(u) == 0 {
            m[(u as usize, u as usize)] -= 1.0 - alpha;
            continue;
        }
        for (v, w) in g.neighbors(u) {
            m[(v as usize, u as usize)] -= (1.0 - alpha) * w / d;
        }
    }
    m
}

fn check_size(g: &WeightedGraph, limit: usize) -> Result<()> {
    if g.n() > limit {
        Err(PprError::TooLarge { n: g.n(), limit })
    } else {
        Ok(())
    }
}

pub fn exact_ppr(g: &WeightedGraph, s: NodeId, alpha: f64) -> Result<PprVector> {
    exact_ppr_with_limit(g, s, alpha, DEFAULT_DENSE_LIMIT)
}

pub fn exact_ppr_with_limit(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    limit: usize,
) -> Result<PprVector> {
    check_alpha(alpha)?;
    g.check_node(s)?;
    check_size(g, limit)?;
    let m = system_matrix(g, alpha);
    let mut rhs = DVector::<f64>::zeros(g.n());
    rhs[s as usize] = alpha;
    let lu = m.clone().lu();
    // (I − (1−α)P) is strictly column diagonally dominant for α > 0.
    let sol = lu.solve(&rhs).expect("PPR system is nonsingular for alpha > 0");
    let residual = (&m * &sol - &rhs).amax();
    if residual > 1e-10 {
        return Err(PprError::InvariantViolation(format!(
            "dense solve residual {residual:e} exceeds 1e-10"
        )));
    }
    Ok(PprVector {
        source: s,
        alpha,
        values: sol.iter().copied().collect(),
    })
}

pub fn ppr_matrix(g: &WeightedGraph, alpha: f64) -> Result<PprMatrix> {
    check_alpha(alpha)?;
    check_size(g, DEFAULT_DENSE_LIMIT)?;
    let n = g.n();
    let inv = system_matrix(g, alpha)
        .lu()
        .try_inverse()
        .expect("PPR system is nonsingular for alpha > 0");
    // Column u of α·M⁻¹ is π_u; store it as row u.
    let mut data = vec![0.0; n * n];
    for u in 0..n {
        for t in 0..n {
            data[u * n + t] = alpha * inv[(t, u)];
        }
    }
    Ok(PprMatrix { alpha, n, data })
}

/// Power-iteration ground truth with `L = 100` rounds.
pub fn ground_truth(g: &WeightedGraph, s: NodeId, alpha: f64) -> Result<PprVector> {
    power_method(g, s, alpha, GROUND_TRUTH_ITERATIONS)
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(PprError::DimensionMismatch { expected, actual })
    }
}

/// `max_t |π(t) − π̂(t) − Σ_u r(u)·π_u(t)|`.
pub fn check_localpush_invariant(
    g: &WeightedGraph,
    s: NodeId,
    reserve: &[f64],
    residue: &[f64],
    ppr: &PprMatrix,
) -> Result<f64> {
    let n = g.n();
    g.check_node(s)?;
    check_len(n, ppr.n())?;
    check_len(n, reserve.len())?;
    check_len(n, residue.len())?;
    let mut rhs = reserve.to_vec();
    for (u, &r) in residue.iter().enumerate() {
        if r != 0.0 {
            for (t, &p) in ppr.row(u as NodeId).iter().enumerate() {
                rhs[t] += r * p;
            }
        }
    }
    Ok(max_violation(ppr.row(s), &rhs))
}

/// `max_t |π(t) − α q(t) − Σ_{⟨u,v⟩} R_uv·π_v(t)|` with
/// `R_uv = (1−α) q(u) A_uv / d(u) − Q_uv`. `expense` is indexed by
/// directed-edge index.
pub fn check_edgepush_invariant(
    g: &WeightedGraph,
    s: NodeId,
    alpha: f64,
    income: &[f64],
    expense: &[f64],
    ppr: &PprMatrix,
) -> Result<f64> {
    let n = g.n();
    g.check_node(s)?;
    check_len(n, ppr.n())?;
    check_len(n, income.len())?;
    check_len(g.num_directed_edges(), expense.len())?;
    let mut rhs: Vec<f64> = income.iter().map(|q| alpha * q).collect();
    for u in 0..n as NodeId {
        let d = g.degree(u);
        for e in g.edge_range(u) {
            let residue = (1.0 - alpha) * income[u as usize] * g.weight(e) / d - expense[e];
            if residue != 0.0 {
                for (t, &p) in ppr.row(g.target(e)).iter().enumerate() {
                    rhs[t] += residue * p;
                }
            }
        }
    }
    Ok(max_violation(ppr.row(s), &rhs))
}

fn max_violation(truth: &[f64], rhs: &[f64]) -> f64 {
    truth
        .iter()
        .zip(rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> WeightedGraph {
        WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn two_node_closed_form() {
        // α Σ (1−α)^{2k} = α / (1 − (1−α)²)
        let pi = exact_ppr(&two_node(), 0, 0.2).unwrap();
        assert!((pi.values[0] - 0.2 / 0.36).abs() < 1e-14);
        assert!((pi.values[1] - 0.16 / 0.36).abs() < 1e-14);
    }

    #[test]
    fn triangle_symmetry() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        for s in 0..3 {
            let pi = exact_ppr(&g, s, 0.2).unwrap();
            assert!((pi.sum() - 1.0).abs() < 1e-12);
            let others: Vec<f64> = (0..3).filter(|&t| t != s).map(|t| pi.values[t as usize]).collect();
            assert!(pi.values[s as usize] > others[0]);
            assert!((others[0] - others[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn ground_truth_short_iterations() {
        let g = two_node();
        let one = power_method(&g, 0, 0.2, 1).unwrap();
        assert_eq!(one.values, vec![0.2, 0.0]);
        let two = power_method(&g, 0, 0.2, 2).unwrap();
        assert!((two.values[0] - 0.2).abs() < 1e-15);
        assert!((two.values[1] - 0.16).abs() < 1e-15);
        let gt = ground_truth(&g, 0, 0.2).unwrap();
        let ex = exact_ppr(&g, 0, 0.2).unwrap();
        let l1: f64 = gt.values.iter().zip(&ex.values).map(|(a, b)| (a - b).abs()).sum();
        assert!(l1 < 1e-9);
    }

    #[test]
    fn isolated_source_is_indicator() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 2.0)]).unwrap();
        let pi = exact_ppr(&g, 2, 0.3).unwrap();
        assert_eq!(&pi.values[..2], &[0.0, 0.0]);
        assert!((pi.values[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn limits_and_parameters() {
        let g = two_node();
        assert!(matches!(
            exact_ppr_with_limit(&g, 0, 0.2, 1),
            Err(PprError::TooLarge { .. })
        ));
        assert!(exact_ppr(&g, 0, 0.0).is_err());
        assert!(exact_ppr(&g, 0, 1.0).is_err());
        assert!(exact_ppr(&g, 5, 0.2).is_err());
    }

    #[test]
    fn localpush_checker_basics() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 3.0)]).unwrap();
        let ppr = ppr_matrix(&g, 0.2).unwrap();
        let reserve = vec![0.0; 3];
        let residue = vec![1.0, 0.0, 0.0];
        let v = check_localpush_invariant(&g, 0, &reserve, &residue, &ppr).unwrap();
        assert!(v < 1e-12);
        let bumped = vec![0.0, 0.1, 0.0];
        let v = check_localpush_invariant(&g, 0, &bumped, &residue, &ppr).unwrap();
        assert!(v >= 0.1 - 1e-9);
        assert!(check_localpush_invariant(&g, 0, &[0.0; 2], &residue, &ppr).is_err());
    }

    #[test]
    fn edgepush_checker_basics() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 3.0)]).unwrap();
        let ppr = ppr_matrix(&g, 0.2).unwrap();
        let income = vec![1.0, 0.0, 0.0];
        let expense = vec![0.0; g.num_directed_edges()];
        let v = check_edgepush_invariant(&g, 0, 0.2, &income, &expense, &ppr).unwrap();
        assert!(v < 1e-12);
        let mut bumped = expense.clone();
        bumped[0] = 0.05;
        let v = check_edgepush_invariant(&g, 0, 0.2, &income, &bumped, &ppr).unwrap();
        assert!(v > 1e-3);
        assert!(check_edgepush_invariant(&g, 0, 0.2, &income, &[0.0], &ppr).is_err());
    }

    #[test]
    fn matrix_rows_match_single_solves() {
        let g = WeightedGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 3.0), (2, 3, 0.5), (0, 3, 2.0)])
            .unwrap();
        let ppr = ppr_matrix(&g, 0.15).unwrap();
        for s in 0..4 {
            let pi = exact_ppr(&g, s, 0.15).unwrap();
            for t in 0..4 {
                assert!((pi.values[t as usize] - ppr.get(s, t)).abs() < 1e-12);
            }
        }
    }
}
