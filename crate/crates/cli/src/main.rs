//! `corrclust` command-line driver.

mod commands;
mod config;
mod error;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::config::{env_overrides, read_config_file, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "corrclust", version, about = "Correlation clustering of signed graphs")]
struct Cli {
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// File of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a planted or G(n,p) signed graph.
    Gen {
        #[arg(long, value_parser = ["planted", "gnp"])]
        kind: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Noise for planted, edge probability for gnp.
        #[arg(long)]
        param: Option<f64>,
        #[arg(long)]
        clusters: Option<usize>,
    },
    /// Solve the covering LP on a connected graph and dump the fractional solution.
    Solve {
        #[arg(long, value_parser = ["parallel", "greedy"])]
        engine: Option<String>,
        #[arg(long)]
        guard: Option<u64>,
        #[arg(long)]
        fallback: bool,
    },
    /// Round a fractional solution into a clustering.
    Round {
        #[arg(long)]
        fractional: Option<PathBuf>,
    },
    /// Solve and round every component, then merge.
    Cluster {
        #[arg(long, value_parser = ["parallel", "greedy"])]
        engine: Option<String>,
    },
    /// Count disagreements of a clustering.
    Eval {
        #[arg(long)]
        clustering: Option<PathBuf>,
    },
    /// Check a fractional solution or a clustering against a graph.
    Verify {
        #[arg(long)]
        fractional: Option<PathBuf>,
        #[arg(long)]
        clustering: Option<PathBuf>,
    },
    /// Seed sweep over planted instances; writes CSV.
    Bench {
        #[arg(long)]
        instances: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, value_parser = ["parallel", "greedy"])]
        engine: Option<String>,
    },
    /// Triangle detection through the clustering LP reduction.
    ReduceDemo {
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Evaluate the rounding inequality on a grid; writes CSV.
    AnalyzeGrid {
        #[arg(long)]
        steps: Option<usize>,
    },
}

/// Every option given on the command line, as raw strings.
fn command_line_flags(m: &ArgMatches, out: &mut BTreeMap<String, String>) {
    for id in m.ids() {
        let key = id.as_str();
        if key == "config" || m.value_source(key) != Some(ValueSource::CommandLine) {
            continue;
        }
        if let Ok(Some(mut vals)) = m.try_get_raw(key) {
            if let Some(v) = vals.next() {
                out.insert(key.to_string(), v.to_string_lossy().into_owned());
            }
        }
    }
    if let Some((_, sub)) = m.subcommand() {
        command_line_flags(sub, out);
    }
}

fn run() -> Result<(), CliError> {
    let matches = Cli::command().try_get_matches().unwrap_or_else(|e| e.exit());
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let mut flags = BTreeMap::new();
    command_line_flags(&matches, &mut flags);
    let config_path = cli.config.clone().or_else(|| std::env::var_os("CORRCLUST_CONFIG").map(PathBuf::from));
    let file = match &config_path {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    let cfg = RunConfig::resolve(&[file, env_overrides(std::env::vars()), flags])?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Gen { .. } => commands::gen(&cfg),
        Command::Solve { .. } => commands::solve(&cfg),
        Command::Round { .. } => commands::round(&cfg),
        Command::Cluster { .. } => commands::cluster(&cfg),
        Command::Eval { .. } => commands::eval(&cfg),
        Command::Verify { .. } => commands::verify(&cfg),
        Command::Bench { .. } => commands::bench(&cfg),
        Command::ReduceDemo { .. } => commands::reduce_demo(&cfg),
        Command::AnalyzeGrid { .. } => commands::analyze_grid(&cfg),
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("corrclust: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
