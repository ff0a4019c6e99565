//! Parameter sweeps over one graph: run a solver for each grid value and
//! query source, score it against ground truth and emit CSV rows.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fora_hybrid_detailed, monte_carlo, power_method, WalkBudget};
use crate::edge_push::{edgepush_with, EdgePushOptions, EdgeThresholds, DEFAULT_SCAN_FRACTION};
use crate::error::{check_alpha, PprError, Result};
use crate::eval::{evaluate, EvalReport};
use crate::graph::{sample_sources, LoadOptions, NodeId, SourceDistribution, WeightedGraph};
use crate::local_push::{l1_theta, localpush};
use crate::oracle::ground_truth;
use crate::synth::GeneratorSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Localpush,
    Edgepush,
    EdgepushScan,
    Power,
    Montecarlo,
    Fora,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Localpush => "localpush",
            Algorithm::Edgepush => "edgepush",
            Algorithm::EdgepushScan => "edgepush-scan",
            Algorithm::Power => "power",
            Algorithm::Montecarlo => "montecarlo",
            Algorithm::Fora => "fora",
        }
    }
}

/// Which guarantee the push solvers target. The grid value is `ε` under
/// `L1` and `r_max` (equal to LocalPush's `θ`) under `Additive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    #[default]
    L1,
    Additive,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphInput {
    Path(String),
    Generator(GeneratorSpec),
}

impl GraphInput {
    pub fn load(&self) -> Result<WeightedGraph> {
        match self {
            GraphInput::Path(p) => WeightedGraph::load_edge_list(p, LoadOptions::default()),
            GraphInput::Generator(spec) => spec.generate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphInput,
    pub algorithm: Algorithm,
    pub error_mode: ErrorMode,
    pub alpha: f64,
    /// `ε`/`r_max` for push solvers, `L` for power, `δ` for the walk-based
    /// solvers.
    pub grid: Vec<f64>,
    pub queries: usize,
    pub sources: SourceDistribution,
    /// Explicit sources; overrides sampling.
    pub fixed_sources: Option<Vec<NodeId>>,
    pub k: usize,
    pub seed: u64,
    pub scan_fraction: f64,
    /// LocalPush threshold of the push phase of `fora`; defaults to `δ`.
    pub fora_push_theta: Option<f64>,
    pub parallel_queries: bool,
}

impl ExperimentConfig {
    pub fn new(graph: GraphInput, algorithm: Algorithm, grid: Vec<f64>) -> Self {
        Self {
            graph,
            algorithm,
            error_mode: ErrorMode::L1,
            alpha: 0.2,
            grid,
            queries: 10,
            sources: SourceDistribution::default(),
            fixed_sources: None,
            k: 50,
            seed: 0,
            scan_fraction: DEFAULT_SCAN_FRACTION,
            fora_push_theta: None,
            parallel_queries: false,
        }
    }

    fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.grid.is_empty() {
            return Err(PprError::InvalidParameter("parameter grid is empty".into()));
        }
        if let Some(v) = self.grid.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(PprError::InvalidParameter(format!("grid value {v} is not positive")));
        }
        if self.queries == 0 && self.fixed_sources.is_none() {
            return Err(PprError::InvalidParameter("query count must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(PprError::InvalidParameter("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// `count` values from `start` down by factors of 10.
pub fn decade_grid(start: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start / 10f64.powi(i as i32)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub algorithm: String,
    pub param: f64,
    /// Query index, or `mean` for the per-grid-point average.
    pub query_id: String,
    /// Source label, empty on average rows.
    pub source: Option<u64>,
    pub l1_error: f64,
    pub max_add_err: f64,
    pub norm_max_add_err: f64,
    pub precision_at_k: f64,
    pub norm_precision_at_k: f64,
    pub best_conductance: Option<f64>,
    pub node_pushes: u64,
    pub edge_pushes: u64,
    pub edges_touched: u64,
    pub wall_time_s: f64,
}

pub const CSV_HEADER: [&str; 14] = [
    "algorithm",
    "param",
    "query_id",
    "source",
    "l1_error",
    "max_add_err",
    "norm_max_add_err",
    "precision_at_k",
    "norm_precision_at_k",
    "best_conductance",
    "node_pushes",
    "edge_pushes",
    "edges_touched",
    "wall_time_s",
];

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    node_pushes: u64,
    edge_pushes: u64,
    edges_touched: u64,
}

fn solve(
    g: &WeightedGraph,
    cfg: &ExperimentConfig,
    s: NodeId,
    param: f64,
    query: usize,
) -> Result<(Vec<f64>, Counts, f64)> {
    let alpha = cfg.alpha;
    let walk_seed = cfg.seed ^ (query as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let budget = || WalkBudget::from_error_params(param, 0.5, 1.0 / g.n().max(2) as f64, walk_seed);
    let edge_thresholds = || match cfg.error_mode {
        ErrorMode::L1 => EdgeThresholds::l1(g, param),
        ErrorMode::Additive => EdgeThresholds::additive(g, param),
    };
    // Thresholds are set up outside the timed region, like graph loading.
    let thresholds = match cfg.algorithm {
        Algorithm::Edgepush | Algorithm::EdgepushScan => Some(edge_thresholds()?),
        _ => None,
    };
    let start = Instant::now();
    let (values, counts) = match cfg.algorithm {
        Algorithm::Localpush => {
            let theta = match cfg.error_mode {
                ErrorMode::L1 => l1_theta(g, param)?,
                ErrorMode::Additive => {
                    crate::local_push::check_r_max(param)?;
                    param
                }
            };
            let (est, acc) = localpush(g, s, alpha, theta)?;
            let counts = Counts {
                node_pushes: acc.node_pushes,
                edge_pushes: 0,
                edges_touched: acc.edge_touches,
            };
            (est.to_dense(), counts)
        }
        Algorithm::Edgepush | Algorithm::EdgepushScan => {
            let options = EdgePushOptions {
                scan_fraction: (cfg.algorithm == Algorithm::EdgepushScan).then_some(cfg.scan_fraction),
                instrumented: false,
            };
            let th = thresholds.as_ref().expect("thresholds built above");
            let (est, acc) = edgepush_with(g, s, alpha, th, options)?;
            let counts = Counts {
                node_pushes: 0,
                edge_pushes: acc.edge_pushes,
                edges_touched: acc.edges_touched,
            };
            (est.to_dense(), counts)
        }
        Algorithm::Power => {
            let rounds = param.round().max(1.0) as usize;
            let pi = power_method(g, s, alpha, rounds)?;
            let touched = (rounds * g.num_directed_edges()) as u64;
            let counts = Counts {
                edges_touched: touched,
                ..Counts::default()
            };
            (pi.values, counts)
        }
        Algorithm::Montecarlo => (monte_carlo(g, s, alpha, budget()?)?.values, Counts::default()),
        Algorithm::Fora => {
            let theta = cfg.fora_push_theta.unwrap_or(param);
            let out = fora_hybrid_detailed(g, s, alpha, theta, budget()?)?;
            let counts = Counts {
                node_pushes: out.push.node_pushes,
                edge_pushes: 0,
                edges_touched: out.push.edge_touches,
            };
            (out.estimate.values, counts)
        }
    };
    Ok((values, counts, start.elapsed().as_secs_f64()))
}

fn row(
    cfg: &ExperimentConfig,
    param: f64,
    query_id: String,
    source: Option<u64>,
    report: &EvalReport,
    counts: Counts,
) -> CsvRow {
    CsvRow {
        algorithm: cfg.algorithm.name().to_string(),
        param,
        query_id,
        source,
        l1_error: report.l1_error,
        max_add_err: report.max_add_err,
        norm_max_add_err: report.normalized_max_add_err,
        precision_at_k: report.precision_at_k,
        norm_precision_at_k: report.normalized_precision_at_k,
        best_conductance: report.best_conductance,
        node_pushes: counts.node_pushes,
        edge_pushes: counts.edge_pushes,
        edges_touched: counts.edges_touched,
        wall_time_s: report.query_time_seconds,
    }
}

fn mean_row(cfg: &ExperimentConfig, param: f64, rows: &[CsvRow]) -> CsvRow {
    let n = rows.len() as f64;
    let avg = |f: fn(&CsvRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let avg_count = |f: fn(&CsvRow) -> u64| {
        (rows.iter().map(|r| f(r) as f64).sum::<f64>() / n).round() as u64
    };
    let conductances: Vec<f64> = rows.iter().filter_map(|r| r.best_conductance).collect();
    CsvRow {
        algorithm: cfg.algorithm.name().to_string(),
        param,
        query_id: "mean".into(),
        source: None,
        l1_error: avg(|r| r.l1_error),
        max_add_err: avg(|r| r.max_add_err),
        norm_max_add_err: avg(|r| r.norm_max_add_err),
        precision_at_k: avg(|r| r.precision_at_k),
        norm_precision_at_k: avg(|r| r.norm_precision_at_k),
        best_conductance: (!conductances.is_empty())
            .then(|| conductances.iter().sum::<f64>() / conductances.len() as f64),
        node_pushes: avg_count(|r| r.node_pushes),
        edge_pushes: avg_count(|r| r.edge_pushes),
        edges_touched: avg_count(|r| r.edges_touched),
        wall_time_s: avg(|r| r.wall_time_s),
    }
}

/// Runs the sweep on an already loaded graph.
pub fn run_on_graph(g: &WeightedGraph, cfg: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    cfg.validate()?;
    let sources = match &cfg.fixed_sources {
        Some(s) => {
            for &u in s {
                g.check_node(u)?;
            }
            s.clone()
        }
        None => sample_sources(g, cfg.sources, cfg.queries)?,
    };
    let truths = sources
        .par_iter()
        .map(|&s| ground_truth(g, s, cfg.alpha))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &param in &cfg.grid {
        let one = |q: usize| -> Result<CsvRow> {
            let s = sources[q];
            let (values, counts, secs) = solve(g, cfg, s, param, q)?;
            let report = evaluate(g, &values, &truths[q].values, cfg.k, secs)?;
            Ok(row(cfg, param, q.to_string(), Some(g.label(s)), &report, counts))
        };
        let rows: Vec<CsvRow> = if cfg.parallel_queries {
            (0..sources.len()).into_par_iter().map(one).collect::<Result<_>>()?
        } else {
            (0..sources.len()).map(one).collect::<Result<_>>()?
        };
        let mean = mean_row(cfg, param, &rows);
        out.extend(rows);
        out.push(mean);
    }
    Ok(out)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    let g = cfg.graph.load()?;
    run_on_graph(&g, cfg)
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(PprError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node_cfg(algorithm: Algorithm, mode: ErrorMode, param: f64) -> (WeightedGraph, ExperimentConfig) {
        let g = WeightedGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        let mut cfg = ExperimentConfig::new(
            GraphInput::Generator("complete:n=2".parse().unwrap()),
            algorithm,
            vec![param],
        );
        cfg.error_mode = mode;
        cfg.fixed_sources = Some(vec![0]);
        (g, cfg)
    }

    #[test]
    fn localpush_trace_row() {
        let (g, cfg) = two_node_cfg(Algorithm::Localpush, ErrorMode::Additive, 0.3);
        let rows = run_on_graph(&g, &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].l1_error - 0.262144).abs() < 1e-9);
        assert_eq!(rows[0].node_pushes, 6);
        assert_eq!(rows[1].query_id, "mean");
    }

    #[test]
    fn edgepush_trace_row() {
        let (g, cfg) = two_node_cfg(Algorithm::Edgepush, ErrorMode::L1, 0.5);
        let rows = run_on_graph(&g, &cfg).unwrap();
        assert!((rows[0].l1_error - 0.2097152).abs() < 1e-9);
        assert_eq!(rows[0].edge_pushes, 6);
    }

    #[test]
    fn csv_is_deterministic_up_to_wall_time() {
        let g = crate::synth::random_weighted_graph(30, 0.1, 0.1, 100.0, 1).unwrap();
        let mut cfg = ExperimentConfig::new(
            GraphInput::Path(String::new()),
            Algorithm::Montecarlo,
            vec![0.1, 0.01],
        );
        cfg.queries = 3;
        let strip = |mut rows: Vec<CsvRow>| {
            rows.iter_mut().for_each(|r| r.wall_time_s = 0.0);
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).unwrap();
            buf
        };
        let a = strip(run_on_graph(&g, &cfg).unwrap());
        let b = strip(run_on_graph(&g, &cfg).unwrap());
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
    }

    #[test]
    fn mean_row_is_average() {
        let g = crate::synth::random_weighted_graph(30, 0.1, 0.1, 100.0, 2).unwrap();
        let mut cfg = ExperimentConfig::new(GraphInput::Path(String::new()), Algorithm::Edgepush, vec![0.01]);
        cfg.queries = 4;
        let rows = run_on_graph(&g, &cfg).unwrap();
        let mean = rows.last().unwrap();
        let l1 = rows[..4].iter().map(|r| r.l1_error).sum::<f64>() / 4.0;
        assert!((mean.l1_error - l1).abs() < 1e-12);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn rejects_bad_configs() {
        let (g, mut cfg) = two_node_cfg(Algorithm::Localpush, ErrorMode::L1, 0.1);
        cfg.grid.clear();
        assert!(run_on_graph(&g, &cfg).is_err());
        cfg.grid = vec![-1.0];
        assert!(run_on_graph(&g, &cfg).is_err());
        assert_eq!(decade_grid(1e-3, 3), vec![1e-3, 1e-4, 1e-5]);
    }
}
