//! Weighted-latency solvers: exact subset dynamic programming over
//! (visited set, last node) states, and a construction-plus-local-search
//! heuristic for larger candidate sets.

use super::{evaluate_order, Tour, WtrpError, WtrpInstance};

/// Exact solver: dynamic programming over (subset, last) states.
///
/// The weighted cumulative latency regroups by edges: each traversed edge
/// is paid by every candidate visited at or after it, so an edge entered
/// with visited set S (including the new node) costs
/// `M[last][next] * (W_total - W(S \ {next}))`. That makes the partial
/// value a function of (subset, last) only, restoring optimal
/// substructure. States also carry their visit prefix so value ties settle
/// toward the lexicographically smallest order; the winning order's
/// objective is re-evaluated canonically.
pub fn solve_exact(inst: &WtrpInstance, exact_limit: usize) -> Result<Tour, WtrpError> {
    let n = inst.candidate_count();
    if n == 0 {
        return Err(WtrpError::Invalid("no candidates".into()));
    }
    if n > exact_limit {
        return Err(WtrpError::TooLarge {
            n,
            limit: exact_limit,
        });
    }

    #[derive(Clone)]
    struct State {
        value: f64,
        prefix: Vec<usize>,
    }

    let w_all: f64 = inst.weights.iter().sum();
    // weight_of[mask] = total weight of the candidates in the mask
    let full = (1usize << n) - 1;
    let mut weight_of = vec![0.0; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        weight_of[mask] = weight_of[mask & (mask - 1)] + inst.weights[low];
    }

    // dp[mask * n + (last-1)]
    let mut dp: Vec<Option<State>> = vec![None; (full + 1) * n];
    for k in 1..=n {
        dp[(1 << (k - 1)) * n + (k - 1)] = Some(State {
            value: inst.matrix[0][k] * w_all,
            prefix: vec![k],
        });
    }

    for mask in 1..=full {
        for last in 1..=n {
            let Some(state) = dp[mask * n + (last - 1)].clone() else {
                continue;
            };
            let remaining = w_all - weight_of[mask];
            for next in 1..=n {
                let bit = 1 << (next - 1);
                if mask & bit != 0 {
                    continue;
                }
                let value = state.value + inst.matrix[last][next] * remaining;
                let slot = &mut dp[(mask | bit) * n + (next - 1)];
                let better = match slot {
                    None => true,
                    Some(cur) => {
                        value < cur.value || (value == cur.value && state.prefix < cur.prefix)
                    }
                };
                if better {
                    let mut prefix = state.prefix.clone();
                    prefix.push(next);
                    *slot = Some(State { value, prefix });
                }
            }
        }
    }

    let mut best: Option<&State> = None;
    for last in 1..=n {
        if let Some(state) = dp[full * n + (last - 1)].as_ref() {
            let better = match best {
                None => true,
                Some(cur) => {
                    state.value < cur.value
                        || (state.value == cur.value && state.prefix < cur.prefix)
                }
            };
            if better {
                best = Some(state);
            }
        }
    }
    let order = best.expect("full states populated").prefix.clone();
    let (cumulative, objective) = evaluate_order(inst, &order);
    Ok(Tour {
        order,
        cumulative,
        objective,
        optimal: true,
    })
}

/// Heuristic solver: two deterministic constructions (best-position
/// insertion in descending weight order, and greedy time-per-weight
/// append), each improved by first-improvement local search cycling
/// pairwise swaps, or-opt segment moves (length <= 3), and segment
/// reversals; best of the two. Needs no randomness, so results are
/// reproducible by construction.
pub fn solve_heuristic(inst: &WtrpInstance) -> Tour {
    let n = inst.candidate_count();
    assert!(n > 0, "no candidates");

    let mut a = construct_insertion(inst);
    local_search(inst, &mut a);
    let mut b = construct_append(inst);
    local_search(inst, &mut b);

    let (_, obj_a) = evaluate_order(inst, &a);
    let (_, obj_b) = evaluate_order(inst, &b);
    let order = if obj_b < obj_a { b } else { a };
    let (cumulative, objective) = evaluate_order(inst, &order);
    Tour {
        order,
        cumulative,
        objective,
        optimal: false,
    }
}

/// Insert candidates in descending weight order, each at the position
/// minimizing the objective of the partial tour.
fn construct_insertion(inst: &WtrpInstance) -> Vec<usize> {
    let n = inst.candidate_count();
    let mut by_weight: Vec<usize> = (1..=n).collect();
    by_weight.sort_by(|&a, &b| {
        inst.weights[b - 1]
            .partial_cmp(&inst.weights[a - 1])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut order: Vec<usize> = Vec::with_capacity(n);
    for &k in &by_weight {
        let mut best_pos = 0;
        let mut best_obj = f64::INFINITY;
        for pos in 0..=order.len() {
            order.insert(pos, k);
            let (_, obj) = evaluate_order(inst, &order);
            if obj < best_obj {
                best_obj = obj;
                best_pos = pos;
            }
            order.remove(pos);
        }
        order.insert(best_pos, k);
    }
    order
}

/// Repeatedly append the candidate with the smallest travel-time-per-weight
/// ratio from the current end.
fn construct_append(inst: &WtrpInstance) -> Vec<usize> {
    let n = inst.candidate_count();
    let mut remaining: Vec<usize> = (1..=n).collect();
    let mut order = Vec::with_capacity(n);
    let mut last = 0usize;
    while !remaining.is_empty() {
        let mut best_i = 0;
        let mut best_ratio = f64::INFINITY;
        for (i, &k) in remaining.iter().enumerate() {
            let ratio = inst.matrix[last][k] / inst.weights[k - 1];
            if ratio < best_ratio {
                best_ratio = ratio;
                best_i = i;
            }
        }
        last = remaining.remove(best_i);
        order.push(last);
    }
    order
}

/// First-improvement passes cycling through pairwise swaps, or-opt segment
/// relocations, and segment reversals until no move improves. Latency
/// objectives shift every downstream arrival time, so each candidate move
/// is scored by full re-evaluation.
fn local_search(inst: &WtrpInstance, order: &mut Vec<usize>) {
    loop {
        let swapped = swap_pass(inst, order);
        let moved = or_opt_pass(inst, order);
        let reversed = reverse_pass(inst, order);
        if !swapped && !moved && !reversed {
            break;
        }
    }
}

fn swap_pass(inst: &WtrpInstance, order: &mut [usize]) -> bool {
    let mut improved = false;
    let (_, mut obj) = evaluate_order(inst, order);
    let mut again = true;
    while again {
        again = false;
        for i in 0..order.len() {
            for j in (i + 1)..order.len() {
                order.swap(i, j);
                let (_, candidate) = evaluate_order(inst, order);
                if candidate < obj - 1e-12 {
                    obj = candidate;
                    improved = true;
                    again = true;
                } else {
                    order.swap(i, j);
                }
            }
        }
    }
    improved
}

fn reverse_pass(inst: &WtrpInstance, order: &mut [usize]) -> bool {
    let mut improved = false;
    let (_, mut obj) = evaluate_order(inst, order);
    let mut again = true;
    while again {
        again = false;
        for i in 0..order.len() {
            for j in (i + 2)..order.len() {
                order[i..=j].reverse();
                let (_, candidate) = evaluate_order(inst, order);
                if candidate < obj - 1e-12 {
                    obj = candidate;
                    improved = true;
                    again = true;
                } else {
                    order[i..=j].reverse();
                }
            }
        }
    }
    improved
}

fn or_opt_pass(inst: &WtrpInstance, order: &mut Vec<usize>) -> bool {
    let mut improved = false;
    let (_, mut obj) = evaluate_order(inst, order);
    let mut again = true;
    while again {
        again = false;
        'moves: for len in 1..=3usize.min(order.len()) {
            for start in 0..=(order.len() - len) {
                let segment: Vec<usize> = order[start..start + len].to_vec();
                let mut rest = order.clone();
                rest.drain(start..start + len);
                for pos in 0..=rest.len() {
                    if pos == start {
                        continue;
                    }
                    let mut candidate = rest.clone();
                    for (off, &k) in segment.iter().enumerate() {
                        candidate.insert(pos + off, k);
                    }
                    let (_, cobj) = evaluate_order(inst, &candidate);
                    if cobj < obj - 1e-12 {
                        *order = candidate;
                        obj = cobj;
                        improved = true;
                        again = true;
                        continue 'moves;
                    }
                }
            }
        }
    }
    improved
}
