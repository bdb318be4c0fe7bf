//! `compact`: set-multicover compaction of a graph export.

use std::path::Path;

use semnav_core::cover;
use semnav_core::memory::{load_graph, save_graph};

use crate::CliError;

pub fn execute(
    graph_path: &Path,
    r: u32,
    exact_limit: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if r == 0 {
        return Err(CliError::Usage("--r must be at least 1".into()));
    }
    let file = std::fs::File::open(graph_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", graph_path.display())))?;
    let mut graph = load_graph(std::io::BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("{}: {e}", graph_path.display())))?;

    let before = graph.anchor_count();
    let report = cover::compact(&mut graph, r, exact_limit);
    println!(
        "anchors: {} -> {} ({})",
        before,
        graph.anchor_count(),
        if report.optimal { "exact" } else { "greedy" }
    );
    println!(
        "selected: {}",
        report
            .kept
            .iter()
            .map(|a| a.0.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!("total cost: {:.6}", report.total_cost);

    if let Some(out) = out {
        let file = std::fs::File::create(out)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
        save_graph(&graph, std::io::BufWriter::new(file))
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}
