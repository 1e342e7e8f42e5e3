use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use fmm_cli::experiment::{derive_rules_text, load_map, load_rules, run_experiment, run_traces};
use fmm_cli::{load_config, CliError, SimConfig};

/// City mobility and network experiments: a fuzzy destination-choice model
/// on a street graph, compared against random-waypoint baselines.
#[derive(Parser)]
#[command(name = "fmm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long)]
    seed: Option<u64>,
    /// Run a single model instead of the configured list.
    #[arg(long)]
    model: Option<String>,
    /// Where output files go.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment: traces, metrics.csv, and plot data.
    Run(RunArgs),
    /// Generate mobility traces only.
    Trace(RunArgs),
    /// Check a config and the files it references, touching nothing.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Derive a destination rule table from the configured priority file and
    /// print it.
    DeriveRules {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(config: &Option<PathBuf>) -> Result<SimConfig, CliError> {
    match config {
        Some(path) => load_config(path),
        None => Ok(SimConfig::default()),
    }
}

fn apply_overrides(mut cfg: SimConfig, args: &RunArgs) -> Result<SimConfig, CliError> {
    if let Some(seed) = args.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(model) = &args.model {
        let model = model
            .parse()
            .map_err(|e: String| CliError::Config(format!("model: {e}")))?;
        cfg.models = vec![model];
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = apply_overrides(load(&args.config)?, &args)?;
            run_experiment(&cfg, &args.out_dir)
        }
        Command::Trace(args) => {
            let cfg = apply_overrides(load(&args.config)?, &args)?;
            run_traces(&cfg, &args.out_dir)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let map = load_map(&cfg)?;
            load_rules(&cfg, &map)?;
            println!(
                "ok: {} model(s), {} seed(s), {} nodes; map has {} vertices, {} edges, {} sites",
                cfg.models.len(),
                cfg.seeds.len(),
                cfg.nodes,
                map.graph.vertex_count(),
                map.graph.edge_count(),
                map.sites.len()
            );
            Ok(())
        }
        Command::DeriveRules { config } => {
            let cfg = load(&config)?;
            print!("{}", derive_rules_text(&cfg)?);
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
