//! `run`: execute a suite under one policy, writing metrics.csv, per-episode
//! JSONL traces, and trajectory plots.

use std::path::PathBuf;

use semnav_core::sim::{load_suite, run_suite, Policy, RunConfig};

use crate::img;
use crate::CliError;

pub struct RunArgs {
    pub suite: PathBuf,
    pub policy: String,
    pub seed: u64,
    pub config: Option<PathBuf>,
    pub oracle: String,
    pub tables: Option<PathBuf>,
    pub out: PathBuf,
    pub async_reasoning: bool,
    pub trace_timing: bool,
    pub no_plots: bool,
}

pub fn execute(args: RunArgs) -> Result<(), CliError> {
    let policy = Policy::parse(&args.policy).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown policy {:?}; expected full, greedy-goal, no-struct, or no-vis",
            args.policy
        ))
    })?;

    // defaults < config file < flags
    let mut cfg = RunConfig::load_layered(args.config.as_deref())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    cfg.seed = args.seed;
    cfg.sim.async_reasoning = args.async_reasoning;
    cfg.sim.trace_timing = args.trace_timing;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let episodes =
        load_suite(&args.suite).map_err(|e| CliError::Usage(format!("suite: {e}")))?;
    let oracle = super::make_oracle(&args.oracle, args.tables.as_deref(), 0.8)?;

    let result = run_suite(&episodes, &cfg, oracle, policy, cfg.seed)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    std::fs::create_dir_all(args.out.join("traces"))
        .map_err(|e| CliError::Runtime(format!("out dir: {e}")))?;

    // metrics.csv
    let m = &result.metrics;
    let csv = format!(
        "policy,seed,episodes,sr,spl,successes,false_positives,no_frontier,stepout\n{},{},{},{:.6},{:.6},{},{},{},{}\n",
        policy.as_str(), cfg.seed, m.episodes, m.sr, m.spl,
        m.successes, m.false_positives, m.no_frontier, m.stepout
    );
    std::fs::write(args.out.join("metrics.csv"), &csv)
        .map_err(|e| CliError::Runtime(format!("metrics.csv: {e}")))?;

    // per-episode traces, plots, and a summary table
    println!("episode                        outcome         steps   l_act   l_short");
    for ((scene, spec), r) in episodes.iter().zip(&result.results) {
        let trace_path = args.out.join("traces").join(format!("{}.jsonl", spec.id));
        let file = std::fs::File::create(&trace_path)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", trace_path.display())))?;
        r.trace
            .write_jsonl(file)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", trace_path.display())))?;

        if !args.no_plots {
            std::fs::create_dir_all(args.out.join("plots"))
                .map_err(|e| CliError::Runtime(format!("out dir: {e}")))?;
            let canvas = img::render_trajectory(scene, &r.trace);
            img::write_ppm(
                &args.out.join("plots").join(format!("{}.ppm", spec.id)),
                canvas.width,
                canvas.height,
                &canvas.rgb,
            )?;
        }

        println!(
            "{:<30} {:<15} {:>5} {:>7.2} {:>8.2}",
            spec.id,
            r.outcome.as_str(),
            r.steps,
            r.actual_length,
            r.shortest_length
        );
    }
    println!(
        "\npolicy {}: SR {:.3}  SPL {:.3}  over {} episodes",
        policy.as_str(),
        m.sr,
        m.spl,
        m.episodes
    );
    Ok(())
}
