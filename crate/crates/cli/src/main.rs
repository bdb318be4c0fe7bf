//! Command-line front end: run episode suites, solve standalone
//! weighted-latency or multicover instances, compact graphs, and render
//! heatmaps and trajectory plots.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

mod commands;
mod img;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "semnav", version, about = "Semantic exploration over a cognitive memory graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an episode suite and write metrics, traces, and plots.
    Run {
        /// Suite file (JSON).
        #[arg(long)]
        suite: PathBuf,
        /// Goal-selection policy: full, greedy-goal, no-struct, no-vis.
        #[arg(long, default_value = "full")]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Config file layered over the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Oracle backend: mock or remote (remote reads ORACLE_URL /
        /// ORACLE_TIMEOUT_MS).
        #[arg(long, default_value = "mock")]
        oracle: String,
        /// Affinity/co-occurrence tables for the mock oracle.
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Run the reasoning worker on its own thread.
        #[arg(long)]
        r#async: bool,
        /// Record oracle latencies into traces (breaks byte-identical
        /// reproducibility).
        #[arg(long)]
        trace_timing: bool,
        /// Skip trajectory plot rendering.
        #[arg(long)]
        no_plots: bool,
    },
    /// Solve a weighted-latency instance from a JSON dump.
    SolveWtrp {
        #[arg(long)]
        file: PathBuf,
        /// Require the exact solver (errors above the size limit).
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = semnav_core::wtrp::DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
    },
    /// Compact a graph export by weighted set multicover.
    Compact {
        #[arg(long)]
        graph: PathBuf,
        /// Coverage redundancy target.
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value_t = semnav_core::cover::DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
        /// Write the pruned graph here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rasterize the semantic field of a graph export to a PGM image.
    Heatmap {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        instruction: String,
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long, default_value = "heatmap.pgm")]
        out: PathBuf,
        /// Meters per pixel.
        #[arg(long, default_value_t = 0.1)]
        resolution: f64,
        /// Disable the task-aware gain on related labels.
        #[arg(long)]
        no_boost: bool,
        /// Field value mapped to full white.
        #[arg(long, default_value_t = 2.0)]
        scale: f64,
    },
    /// Export a memory graph: round-trip an existing dump, or explore a
    /// scene for a fixed number of steps and dump the result.
    DumpGraph {
        /// Existing graph export to validate and re-emit.
        #[arg(long, conflicts_with = "scene")]
        graph: Option<PathBuf>,
        /// Scene to explore.
        #[arg(long, requires = "instruction")]
        scene: Option<PathBuf>,
        #[arg(long)]
        instruction: Option<String>,
        #[arg(long, default_value_t = 120)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Start pose as "x,y[,heading]"; defaults to the map center.
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Errors mapped to exit codes.
pub enum CliError {
    /// Bad flags, files, or config: exit 2.
    Usage(String),
    /// Failure while running: exit 1.
    Runtime(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        match self {
            CliError::Usage(m) => {
                eprintln!("error: {m}");
                ExitCode::from(2)
            }
            CliError::Runtime(m) => {
                eprintln!("error: {m}");
                ExitCode::from(1)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            suite,
            policy,
            seed,
            config,
            oracle,
            tables,
            out,
            r#async,
            trace_timing,
            no_plots,
        } => commands::run::execute(commands::run::RunArgs {
            suite,
            policy,
            seed,
            config,
            oracle,
            tables,
            out,
            async_reasoning: r#async,
            trace_timing,
            no_plots,
        }),
        Command::SolveWtrp {
            file,
            exact,
            exact_limit,
        } => commands::solve::execute(&file, exact, exact_limit),
        Command::Compact {
            graph,
            r,
            exact_limit,
            out,
        } => commands::compact::execute(&graph, r, exact_limit, out.as_deref()),
        Command::Heatmap {
            graph,
            instruction,
            tables,
            out,
            resolution,
            no_boost,
            scale,
        } => commands::heatmap::execute(
            &graph,
            &instruction,
            tables.as_deref(),
            &out,
            resolution,
            no_boost,
            scale,
        ),
        Command::DumpGraph {
            graph,
            scene,
            instruction,
            steps,
            seed,
            start,
            out,
        } => commands::dump_graph::execute(
            graph.as_deref(),
            scene.as_deref(),
            instruction.as_deref(),
            steps,
            seed,
            start.as_deref(),
            &out,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
