use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use hetcondense::generate::{planted, PlantedConfig};
use hetcondense::greedy::GreedyMode;
use hetcondense::hierarchy::parse_role_overrides;
use hetcondense::pipeline::{hierarchy_for, select_targets, target_metapaths};
use hetcondense::{
    load_graph, run, save_graph, CondenseConfig, CondenseParams, Error, HeteroGraph,
    ImportanceKind, Method, PoolMode, PprMode,
};

#[derive(Debug, Parser)]
#[command(
    name = "hetcondense",
    version,
    about = "Training-free heterogeneous graph condensation"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Condense a graph directory into a smaller one.
    Condense(CondenseArgs),
    /// Print an intermediate artifact without condensing.
    Inspect {
        #[arg(value_enum)]
        what: Inspect,
        #[command(flatten)]
        opts: Options,
    },
    /// Load and validate a graph directory.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write a synthetic planted-community graph.
    Generate {
        #[arg(long)]
        output: PathBuf,
        /// Approximate edge count; the small preset when omitted.
        #[arg(long)]
        edges: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Inspect {
    Metapaths,
    Hierarchy,
    Scores,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Pool {
    Train,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Baseline {
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PprModeArg {
    Power,
    Push,
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ImportanceArg {
    Ppr,
    Degree,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GreedyArg {
    Lazy,
    Naive,
}

#[derive(Debug, Args)]
struct Options {
    #[arg(long)]
    input: PathBuf,
    /// Fraction of nodes kept per type, in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    /// Maximum meta-path length.
    #[arg(long, default_value_t = 2)]
    hops: usize,
    /// PPR teleport probability.
    #[arg(long, default_value_t = 0.15)]
    alpha: f64,
    /// PPR per-entry error bound.
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = PprModeArg::Power)]
    ppr_mode: PprModeArg,
    #[arg(long, value_enum, default_value_t = ImportanceArg::Ppr)]
    importance: ImportanceArg,
    #[arg(long, value_enum, default_value_t = GreedyArg::Lazy)]
    greedy: GreedyArg,
    /// Target nodes eligible for selection.
    #[arg(long, value_enum, default_value_t = Pool::Train)]
    pool: Pool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File of `type role` lines overriding the inferred hierarchy.
    #[arg(long)]
    roles: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CondenseArgs {
    #[command(flatten)]
    opts: Options,
    #[arg(long)]
    output: PathBuf,
    /// Additional location for the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Pick nodes uniformly at random under the same budgets.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Suppress the text report.
    #[arg(long, short)]
    quiet: bool,
}

impl Options {
    fn params(&self) -> CondenseParams {
        CondenseParams {
            ratio: self.ratio,
            max_hops: self.hops,
            alpha: self.alpha,
            epsilon: self.epsilon,
            ppr_mode: match self.ppr_mode {
                PprModeArg::Power => PprMode::Power,
                PprModeArg::Push => PprMode::Push,
                PprModeArg::Exact => PprMode::Exact,
            },
            importance: match self.importance {
                ImportanceArg::Ppr => ImportanceKind::Ppr,
                ImportanceArg::Degree => ImportanceKind::Degree,
            },
            pool: match self.pool {
                Pool::Train => PoolMode::Train,
                Pool::All => PoolMode::All,
            },
            greedy: match self.greedy {
                GreedyArg::Lazy => GreedyMode::Lazy,
                GreedyArg::Naive => GreedyMode::Naive,
            },
            seed: self.seed,
            ..CondenseParams::default()
        }
    }

    fn params_with_roles(&self) -> anyhow::Result<CondenseParams> {
        let mut params = self.params();
        if let Some(path) = &self.roles {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            params.roles = parse_role_overrides(&text)?;
        }
        Ok(params)
    }
}

fn inspect(what: Inspect, opts: &Options) -> anyhow::Result<()> {
    let graph = load_graph(&opts.input)?;
    let params = opts.params_with_roles()?;
    match what {
        Inspect::Metapaths => {
            for c in target_metapaths(&graph, &params)? {
                println!(
                    "{:<32} {:<24} nnz {:>10} density {:.4e}",
                    c.metapath.to_string(),
                    c.metapath.type_chain(),
                    c.matrix.nnz(),
                    c.matrix.density()
                );
            }
        }
        Inspect::Hierarchy => {
            let h = hierarchy_for(&graph, &params.roles)?;
            for (ty, role) in &h.roles {
                println!("{ty}:{role} distance {}", h.distance[ty]);
            }
            for ty in &h.ambiguous {
                println!("ambiguous: {ty} has no father type neighbour");
            }
        }
        Inspect::Scores => print_scores(&graph, &params)?,
    }
    Ok(())
}

fn print_scores(graph: &HeteroGraph, params: &CondenseParams) -> anyhow::Result<()> {
    let (_, budget, sel) = select_targets(graph, params)?;
    println!(
        "budget {} over classes {:?}",
        budget.total, budget.per_class
    );
    for p in &sel.table.paths {
        println!(
            "path {} (|R| = {}, group {})",
            p.path, p.normalizer, p.group_size
        );
        for run in &p.runs {
            println!("  class {} budget {}", run.class, run.budget);
            for (i, (&v, &g)) in run.selected.iter().zip(&run.gains).enumerate() {
                println!(
                    "    {v:>8} gain {g:.6} covered {:>8} F {:.6}",
                    run.covered[i], run.objective[i]
                );
            }
        }
    }
    println!("aggregated");
    for s in &sel.table.aggregated {
        println!("  {:>8} class {:<4} score {:.6}", s.node, s.class, s.score);
    }
    Ok(())
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Condense(args) => {
            let mut params = args.opts.params();
            if args.baseline.is_some() {
                params.method = Method::Random;
            }
            let config = CondenseConfig {
                input: args.opts.input.clone(),
                output: args.output.clone(),
                report: args.report.clone(),
                roles: args.opts.roles.clone(),
                params,
            };
            let report = run(&config)?;
            if !args.quiet {
                print!("{report}");
            }
            log::info!("wrote {}", args.output.display());
        }
        Command::Inspect { what, opts } => inspect(what, &opts)?,
        Command::Validate { input } => {
            let g = load_graph(&input)?;
            println!(
                "ok: {} types, {} relations, {} edges, {} target nodes",
                g.node_types.len(),
                g.relations.len(),
                g.num_edges(),
                g.target_count()
            );
        }
        Command::Generate {
            output,
            edges,
            seed,
        } => {
            let cfg = edges.map_or_else(PlantedConfig::small, PlantedConfig::with_edges);
            let g = planted(&cfg, seed);
            save_graph(&g, &output)?;
            println!("wrote {} edges to {}", g.num_edges(), output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.downcast_ref::<Error>() {
                Some(err) => {
                    match err.stage() {
                        Some(stage) => eprintln!("hetcondense: [{stage}] {}", err.root()),
                        None => eprintln!("hetcondense: {err}"),
                    }
                    if let Error::Validation(report) = err.root() {
                        eprint!("{report}");
                    }
                }
                None => eprintln!("hetcondense: {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
