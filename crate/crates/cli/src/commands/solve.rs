//! `solve-wtrp`: solve a dumped instance and print the order with its
//! cumulative costs.

use std::path::Path;

use semnav_core::wtrp::{solve_exact, solve_heuristic, WtrpError, WtrpInstance};

use crate::CliError;

pub fn execute(file: &Path, exact: bool, exact_limit: usize) -> Result<(), CliError> {
    let inst = WtrpInstance::load(file).map_err(|e| CliError::Usage(e.to_string()))?;
    let n = inst.candidate_count();

    let tour = if exact {
        solve_exact(&inst, exact_limit).map_err(|e| match e {
            WtrpError::TooLarge { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        })?
    } else if n <= exact_limit {
        solve_exact(&inst, exact_limit).map_err(|e| CliError::Runtime(e.to_string()))?
    } else {
        solve_heuristic(&inst)
    };

    println!(
        "candidates: {n}  solver: {}",
        if tour.optimal { "exact" } else { "heuristic" }
    );
    println!("order: {}", join(&tour.order));
    for (i, (&k, &c)) in tour.order.iter().zip(&tour.cumulative).enumerate() {
        println!("  step {:>2}: node {:>3}  C = {:.6}  W = {:.6}", i + 1, k, c, inst.weights[k - 1]);
    }
    println!("objective: {:.6}", tour.objective);
    Ok(())
}

fn join(order: &[usize]) -> String {
    order
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
