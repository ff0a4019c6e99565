use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use edgeppr::bench::{decade_grid, run_on_graph, write_csv, Algorithm, ErrorMode, ExperimentConfig, GraphInput};
use edgeppr::synth::GeneratorSpec;
use edgeppr::unbalance::unbalance_report;
use edgeppr::{exact_ppr, ground_truth, NodeId, PprError, SourceDistribution, SourceMode, WeightedGraph};

#[derive(Parser)]
#[command(name = "edgeppr", version, about = "Approximate single-source PPR experiments")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "EDGEPPR_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a solver over a parameter grid and write one CSV row per query.
    Run(RunArgs),
    /// Print the unbalancedness report of a graph as JSON.
    Report {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a graph and write it as an edge list.
    Gen {
        /// Generator spec, e.g. `unbalanced-star:n=4,b=0.7`.
        spec: GeneratorSpec,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the reference PPR vector of one source as `label value` lines.
    Truth {
        #[command(flatten)]
        graph: GraphArgs,
        /// Source node label.
        #[arg(long)]
        source: u64,
        #[arg(long, default_value_t = 0.2)]
        alpha: f64,
        /// Use the dense LU solve instead of power iteration.
        #[arg(long)]
        exact: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GraphArgs {
    /// Edge-list file (`u v [w]` per line).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Generator spec used instead of a file.
    #[arg(long)]
    gen: Option<GeneratorSpec>,
}

impl GraphArgs {
    fn input(&self) -> GraphInput {
        match (&self.graph, &self.gen) {
            (Some(p), _) => GraphInput::Path(p.to_string_lossy().into_owned()),
            (None, Some(spec)) => GraphInput::Generator(spec.clone()),
            (None, None) => unreachable!("clap enforces one graph source"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Uniform,
    Degree,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    #[arg(long, value_enum, default_value_t = ErrorMode::L1)]
    error_mode: ErrorMode,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    /// Comma-separated grid values (ε, r_max, L or δ depending on the solver).
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    /// Decade grid start, used when `--grid` is absent.
    #[arg(long, default_value_t = 1e-3)]
    grid_start: f64,
    #[arg(long, default_value_t = 4)]
    grid_steps: usize,
    #[arg(long, default_value_t = 10)]
    queries: usize,
    #[arg(long, value_enum, default_value_t = SourceArg::Degree)]
    source_mode: SourceArg,
    /// Explicit source labels, comma-separated; overrides sampling.
    #[arg(long, value_delimiter = ',')]
    sources: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long, default_value_t = 0, env = "EDGEPPR_SEED")]
    seed: u64,
    #[arg(long, default_value_t = edgeppr::edge_push::DEFAULT_SCAN_FRACTION)]
    scan_fraction: f64,
    /// LocalPush threshold of the push phase of `fora` (defaults to δ).
    #[arg(long)]
    fora_theta: Option<f64>,
    /// Run the queries of one grid point concurrently.
    #[arg(long)]
    parallel: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>, PprError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn node_of(g: &WeightedGraph, label: u64) -> Result<NodeId, PprError> {
    g.labels()
        .binary_search(&label)
        .map(|i| i as NodeId)
        .map_err(|_| PprError::InvalidParameter(format!("no node with label {label}")))
}

fn run(cli: Cli) -> Result<(), PprError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| PprError::InvalidParameter(e.to_string()))?;
    }
    match cli.command {
        Command::Run(args) => {
            let input = args.graph.input();
            let g = input.load()?;
            let grid = if args.grid.is_empty() {
                decade_grid(args.grid_start, args.grid_steps)
            } else {
                args.grid.clone()
            };
            let mut cfg = ExperimentConfig::new(input, args.algorithm, grid);
            cfg.error_mode = args.error_mode;
            cfg.alpha = args.alpha;
            cfg.queries = args.queries;
            cfg.sources = SourceDistribution {
                mode: match args.source_mode {
                    SourceArg::Uniform => SourceMode::Uniform,
                    SourceArg::Degree => SourceMode::DegreeProportional,
                },
                seed: args.seed,
            };
            if !args.sources.is_empty() {
                let ids = args.sources.iter().map(|&l| node_of(&g, l)).collect::<Result<_, _>>()?;
                cfg.fixed_sources = Some(ids);
            }
            cfg.k = args.k;
            cfg.seed = args.seed;
            cfg.scan_fraction = args.scan_fraction;
            cfg.fora_push_theta = args.fora_theta;
            cfg.parallel_queries = args.parallel;
            let rows = run_on_graph(&g, &cfg)?;
            write_csv(&rows, sink(&args.output)?)
        }
        Command::Report { graph, output } => {
            let g = graph.input().load()?;
            let report = unbalance_report(&g)?;
            let mut out = sink(&output)?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            out.flush()?;
            Ok(())
        }
        Command::Gen { spec, output } => {
            let g = spec.generate()?;
            let mut out = sink(&output)?;
            g.write_edge_list(&mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::Truth {
            graph,
            source,
            alpha,
            exact,
            output,
        } => {
            let g = graph.input().load()?;
            let s = node_of(&g, source)?;
            let pi = if exact { exact_ppr(&g, s, alpha)? } else { ground_truth(&g, s, alpha)? };
            let mut out = sink(&output)?;
            for (u, v) in pi.values.iter().enumerate() {
                writeln!(out, "{} {}", g.label(u as NodeId), v)?;
            }
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edgeppr: {e}");
            ExitCode::FAILURE
        }
    }
}
