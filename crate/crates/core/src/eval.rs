//! Error metrics against a reference vector, top-k precision and sweep-cut
//! clustering.

use serde::{Deserialize, Serialize};

use crate::error::{PprError, Result};
use crate::graph::{NodeId, WeightedGraph};

fn check_dims(est: &[f64], truth: &[f64]) -> Result<()> {
    if est.len() == truth.len() {
        Ok(())
    } else {
        Err(PprError::DimensionMismatch {
            expected: truth.len(),
            actual: est.len(),
        })
    }
}

pub fn l1_error(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_dims(est, truth)?;
    Ok(est.iter().zip(truth).map(|(a, b)| (a - b).abs()).sum())
}

pub fn max_add_err(est: &[f64], truth: &[f64]) -> Result<f64> {
    check_dims(est, truth)?;
    Ok(est.iter().zip(truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `max_t |π(t) − π̂(t)| / d(t)` over nodes of positive degree.
pub fn normalized_max_add_err(g: &WeightedGraph, est: &[f64], truth: &[f64]) -> Result<f64> {
    check_dims(est, truth)?;
    check_dims(est, g.degrees())?;
    Ok(est
        .iter()
        .zip(truth)
        .zip(g.degrees())
        .filter(|(_, &d)| d > 0.0)
        .map(|((a, b), d)| (a - b).abs() / d)
        .fold(0.0, f64::max))
}

/// The `k` largest entries of `values` among `candidates`, ties broken by
/// ascending id.
fn top_k(values: &[f64], candidates: impl Iterator<Item = NodeId>, k: usize) -> Vec<NodeId> {
    let mut ids: Vec<NodeId> = candidates.collect();
    ids.sort_by(|&a, &b| {
        values[b as usize]
            .total_cmp(&values[a as usize])
            .then(a.cmp(&b))
    });
    ids.truncate(k);
    ids
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Precision {
    pub value: f64,
    /// `k` actually used.
    pub k: usize,
    /// Set when the requested `k` exceeded the number of ranked nodes.
    pub clamped: bool,
}

/// `|V_k(est) ∩ V_k(truth)| / k`. With `normalize_by_degree` nodes are ranked
/// by value over degree and degree-0 nodes are left out.
pub fn precision_at_k(
    g: &WeightedGraph,
    est: &[f64],
    truth: &[f64],
    k: usize,
    normalize_by_degree: bool,
) -> Result<Precision> {
    check_dims(est, truth)?;
    check_dims(est, g.degrees())?;
    if k == 0 {
        return Err(PprError::InvalidParameter("k must be at least 1".into()));
    }
    let (est, truth, pool): (Vec<f64>, Vec<f64>, Vec<NodeId>) = if normalize_by_degree {
        let d = g.degrees();
        (
            est.iter().zip(d).map(|(x, d)| if *d > 0.0 { x / d } else { 0.0 }).collect(),
            truth.iter().zip(d).map(|(x, d)| if *d > 0.0 { x / d } else { 0.0 }).collect(),
            (0..g.n() as NodeId).filter(|&u| d[u as usize] > 0.0).collect(),
        )
    } else {
        (est.to_vec(), truth.to_vec(), (0..g.n() as NodeId).collect())
    };
    let clamped = k > pool.len();
    let k = k.min(pool.len());
    if k == 0 {
        return Ok(Precision {
            value: 1.0,
            k,
            clamped,
        });
    }
    let mut a = top_k(&est, pool.iter().copied(), k);
    let mut b = top_k(&truth, pool.iter().copied(), k);
    a.sort_unstable();
    b.sort_unstable();
    let (mut i, mut j, mut hits) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                hits += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(Precision {
        value: hits as f64 / k as f64,
        k,
        clamped,
    })
}

/// `cut(S) / min{vol(S), vol(V∖S)}`.
pub fn conductance(g: &WeightedGraph, set: &[NodeId]) -> Result<f64> {
    let mut inside = vec![false; g.n()];
    for &u in set {
        g.check_node(u)?;
        inside[u as usize] = true;
    }
    let mut vol = 0.0;
    let mut cut = 0.0;
    for u in (0..g.n() as NodeId).filter(|&u| inside[u as usize]) {
        vol += g.degree(u);
        cut += g
            .neighbors(u)
            .filter(|&(v, _)| !inside[v as usize])
            .map(|(_, w)| w)
            .sum::<f64>();
    }
    let denom = vol.min(g.total_weight() - vol);
    if denom <= 0.0 {
        return Err(PprError::InvalidParameter(
            "conductance undefined for a set of zero volume on either side".into(),
        ));
    }
    Ok(cut / denom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCut {
    /// Nodes with nonzero `π̂(u)/d(u)`, descending, ties by ascending id.
    pub order: Vec<NodeId>,
    /// Conductance of each prefix `order[..i+1]`; `None` where one side has
    /// zero volume.
    pub conductance: Vec<Option<f64>>,
    /// Size of the best prefix, or `None` if every prefix was skipped.
    pub best_size: Option<usize>,
    pub best_conductance: Option<f64>,
}

impl SweepCut {
    pub fn best_set(&self) -> &[NodeId] {
        &self.order[..self.best_size.unwrap_or(0)]
    }
}

pub fn sweep_cut(g: &WeightedGraph, est: &[f64]) -> Result<SweepCut> {
    check_dims(est, g.degrees())?;
    let mut order: Vec<NodeId> = (0..g.n() as NodeId)
        .filter(|&u| g.degree(u) > 0.0 && est[u as usize] != 0.0)
        .collect();
    if order.is_empty() {
        return Err(PprError::ZeroEstimate);
    }
    let key = |u: NodeId| est[u as usize] / g.degree(u);
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));

    let total = g.total_weight();
    let mut inside = vec![false; g.n()];
    let (mut vol, mut cut) = (0.0, 0.0);
    let mut conductance = Vec::with_capacity(order.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, &u) in order.iter().enumerate() {
        inside[u as usize] = true;
        let d = g.degree(u);
        let into_set: f64 = g
            .neighbors(u)
            .filter(|&(v, _)| inside[v as usize])
            .map(|(_, w)| w)
            .sum();
        vol += d;
        cut += d - 2.0 * into_set;
        let denom = vol.min(total - vol);
        let phi = if denom > 0.0 { Some(cut.max(0.0) / denom) } else { None };
        if let Some(p) = phi {
            if best.is_none_or(|(_, b)| p < b) {
                best = Some((i + 1, p));
            }
        }
        conductance.push(phi);
    }
    Ok(SweepCut {
        order,
        conductance,
        best_size: best.map(|b| b.0),
        best_conductance: best.map(|b| b.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub l1_error: f64,
    pub max_add_err: f64,
    pub normalized_max_add_err: f64,
    pub precision_at_k: f64,
    pub normalized_precision_at_k: f64,
    pub best_conductance: Option<f64>,
    pub best_sweep_set_size: Option<usize>,
    pub query_time_seconds: f64,
}

pub fn evaluate(
    g: &WeightedGraph,
    est: &[f64],
    truth: &[f64],
    k: usize,
    query_time_seconds: f64,
) -> Result<EvalReport> {
    let sweep = match sweep_cut(g, est) {
        Ok(s) => Some(s),
        Err(PprError::ZeroEstimate) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        l1_error: l1_error(est, truth)?,
        max_add_err: max_add_err(est, truth)?,
        normalized_max_add_err: normalized_max_add_err(g, est, truth)?,
        precision_at_k: precision_at_k(g, est, truth, k, false)?.value,
        normalized_precision_at_k: precision_at_k(g, est, truth, k, true)?.value,
        best_conductance: sweep.as_ref().and_then(|s| s.best_conductance),
        best_sweep_set_size: sweep.as_ref().and_then(|s| s.best_size),
        query_time_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> WeightedGraph {
        WeightedGraph::from_edges(4, &[(0, 1, 3.0), (1, 2, 1.0), (2, 3, 3.0)]).unwrap()
    }

    #[test]
    fn error_metrics() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let truth = [0.5, 0.5, 0.0];
        let est = [0.4, 0.5, 0.0];
        assert!((max_add_err(&est, &truth).unwrap() - 0.1).abs() < 1e-15);
        assert!((normalized_max_add_err(&g, &est, &truth).unwrap() - 0.05).abs() < 1e-15);
        assert!((l1_error(&est, &truth).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(l1_error(&truth, &truth).unwrap(), 0.0);
        assert!(l1_error(&est[..2], &truth).is_err());
    }

    #[test]
    fn precision_examples() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let truth = [0.5, 0.3, 0.2];
        let est = [0.5, 0.2, 0.3];
        assert_eq!(precision_at_k(&g, &est, &truth, 2, false).unwrap().value, 0.5);
        assert_eq!(precision_at_k(&g, &truth, &truth, 2, true).unwrap().value, 1.0);
        let p = precision_at_k(&g, &[0.0; 3], &truth, 5, false).unwrap();
        assert_eq!((p.value, p.k, p.clamped), (1.0, 3, true));
        assert!(precision_at_k(&g, &est, &truth, 0, false).is_err());
    }

    #[test]
    fn path_conductance() {
        let g = path4();
        assert!((conductance(&g, &[0, 1]).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert!((conductance(&g, &[2, 3]).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        let single = WeightedGraph::from_edges(2, &[(0, 1, 2.5)]).unwrap();
        assert_eq!(conductance(&single, &[0]).unwrap(), 1.0);
        assert!(conductance(&g, &[0, 1, 2, 3]).is_err());
    }

    #[test]
    fn sweep_on_exact_ppr() {
        let g = path4();
        let pi = crate::oracle::exact_ppr(&g, 0, 0.2).unwrap();
        let sweep = sweep_cut(&g, &pi.values).unwrap();
        assert_eq!(sweep.best_size, Some(2));
        assert!((sweep.best_conductance.unwrap() - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(sweep.best_set(), &[0, 1]);
        for (i, phi) in sweep.conductance.iter().enumerate() {
            match phi {
                Some(p) => {
                    let scratch = conductance(&g, &sweep.order[..i + 1]).unwrap();
                    assert!((p - scratch).abs() < 1e-12);
                }
                None => assert_eq!(i + 1, 4),
            }
        }
        assert!(matches!(sweep_cut(&g, &[0.0; 4]), Err(PprError::ZeroEstimate)));
    }
}
