//! Anchor compaction as weighted set multicover: minimize total selection
//! cost subject to per-object coverage requirements, solved exactly by
//! branch and bound on small instances with a greedy fallback above the
//! size limit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory::{AnchorId, CognitiveMemoryGraph, ObjectId};

/// Default anchor-count ceiling for the exact solver.
pub const DEFAULT_EXACT_LIMIT: usize = 24;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("instance has {n} anchors, exact limit is {limit}")]
    TooLarge { n: usize, limit: usize },
}

/// A multicover instance extracted from the graph. Anchors are indexed
/// 0..n in ascending id order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MulticoverInstance {
    pub anchor_ids: Vec<AnchorId>,
    pub costs: Vec<f64>,
    pub object_ids: Vec<ObjectId>,
    /// For each object, the sorted anchor indexes observing it.
    pub coverage: Vec<Vec<usize>>,
    /// Required observation count per object, already clamped to the
    /// coverage size so the instance is feasible by construction.
    pub required: Vec<u32>,
}

/// A feasible anchor selection.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionResult {
    /// Selected anchor indexes, ascending.
    pub selected: Vec<usize>,
    pub total_cost: f64,
    /// True when produced by the exact solver.
    pub optimal: bool,
}

impl MulticoverInstance {
    pub fn anchor_count(&self) -> usize {
        self.anchor_ids.len()
    }

    /// Check a selection against every coverage constraint.
    pub fn is_feasible(&self, selected: &[usize]) -> bool {
        let chosen: std::collections::BTreeSet<usize> = selected.iter().copied().collect();
        self.coverage
            .iter()
            .zip(&self.required)
            .all(|(cov, &r)| cov.iter().filter(|i| chosen.contains(i)).count() as u32 >= r)
    }

    pub fn cost_of(&self, selected: &[usize]) -> f64 {
        selected.iter().map(|&i| self.costs[i]).sum()
    }
}

/// Build the instance from the graph: coverage sets from the edges, and
/// r_j = min(r, degree of object j).
pub fn build_instance(graph: &CognitiveMemoryGraph, r: u32) -> MulticoverInstance {
    assert!(r >= 1, "redundancy target must be >= 1");
    let anchor_ids: Vec<AnchorId> = graph.anchors().map(|a| a.id).collect();
    let index_of: std::collections::BTreeMap<AnchorId, usize> = anchor_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i))
        .collect();
    let costs: Vec<f64> = graph.anchors().map(|a| a.cost).collect();

    let mut object_ids = Vec::new();
    let mut coverage = Vec::new();
    let mut required = Vec::new();
    for obj in graph.objects() {
        let mut cov: Vec<usize> = graph
            .observers_of(obj.id)
            .into_iter()
            .map(|a| index_of[&a])
            .collect();
        cov.sort_unstable();
        if cov.is_empty() {
            // unobserved object: nothing to cover
            continue;
        }
        required.push(r.min(cov.len() as u32));
        object_ids.push(obj.id);
        coverage.push(cov);
    }
    MulticoverInstance {
        anchor_ids,
        costs,
        object_ids,
        coverage,
        required,
    }
}

/// Exact minimum-cost multicover by depth-first branch and bound.
///
/// The lower bound is LP-free: the larger of (a) the max over objects of
/// the cost of its cheapest remaining covers, and (b) the same sum over all
/// objects with each anchor cost scaled down by how many demanded objects
/// it covers, which corrects the double counting. Cost ties resolve toward
/// the lexicographically smallest selected index set.
pub fn solve_exact(
    inst: &MulticoverInstance,
    exact_limit: usize,
) -> Result<SelectionResult, CoverError> {
    let n = inst.anchor_count();
    if n > exact_limit {
        return Err(CoverError::TooLarge {
            n,
            limit: exact_limit,
        });
    }

    // covers[i] = object indexes covered by anchor i
    let mut covers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, cov) in inst.coverage.iter().enumerate() {
        for &i in cov {
            covers[i].push(j);
        }
    }

    let mut demand: Vec<i64> = inst.required.iter().map(|&r| r as i64).collect();
    // how many undecided-or-selected anchors still cover each object
    let mut supply: Vec<i64> = inst.coverage.iter().map(|c| c.len() as i64).collect();

    struct Search<'a> {
        inst: &'a MulticoverInstance,
        covers: &'a [Vec<usize>],
        best_cost: f64,
        best_sel: Vec<usize>,
    }

    impl Search<'_> {
        fn lower_bound(&self, next: usize, demand: &[i64]) -> f64 {
            let n = self.inst.anchor_count();
            // scaled-cost correction: each remaining anchor's cost divided by
            // the number of still-demanded objects it covers
            let mut scaled = vec![0.0; n];
            for i in next..n {
                let d = self.covers[i].iter().filter(|&&j| demand[j] > 0).count();
                scaled[i] = if d > 0 {
                    self.inst.costs[i] / d as f64
                } else {
                    f64::INFINITY
                };
            }
            let mut max_object = 0.0_f64;
            let mut sum_scaled = 0.0_f64;
            for (j, cov) in self.inst.coverage.iter().enumerate() {
                if demand[j] <= 0 {
                    continue;
                }
                let k = demand[j] as usize;
                let mut plain: Vec<f64> = cov
                    .iter()
                    .filter(|&&i| i >= next)
                    .map(|&i| self.inst.costs[i])
                    .collect();
                if plain.len() < k {
                    return f64::INFINITY; // infeasible branch
                }
                plain.sort_by(|a, b| a.partial_cmp(b).unwrap());
                max_object = max_object.max(plain[..k].iter().sum());

                let mut sc: Vec<f64> = cov
                    .iter()
                    .filter(|&&i| i >= next)
                    .map(|&i| scaled[i])
                    .collect();
                sc.sort_by(|a, b| a.partial_cmp(b).unwrap());
                sum_scaled += sc[..k].iter().sum::<f64>();
            }
            max_object.max(sum_scaled)
        }

        fn dfs(
            &mut self,
            next: usize,
            cost: f64,
            sel: &mut Vec<usize>,
            demand: &mut [i64],
            supply: &mut [i64],
        ) {
            if demand.iter().all(|&d| d <= 0) {
                if cost < self.best_cost - 1e-12
                    || ((cost - self.best_cost).abs() <= 1e-12 && sel[..] < self.best_sel[..])
                {
                    self.best_cost = cost;
                    self.best_sel = sel.clone();
                }
                return;
            }
            if next >= self.inst.anchor_count() {
                return;
            }
            // strict test only: equal-bound branches continue so cost ties
            // can settle toward the lex-smallest selection
            if cost + self.lower_bound(next, demand) > self.best_cost + 1e-12 {
                return;
            }

            // include anchor `next` first: biases the search toward
            // lex-smaller selections so ties settle early
            sel.push(next);
            for &j in &self.covers[next] {
                demand[j] -= 1;
            }
            self.dfs(next + 1, cost + self.inst.costs[next], sel, demand, supply);
            sel.pop();
            for &j in &self.covers[next] {
                demand[j] += 1;
            }

            // exclude anchor `next` when feasibility survives
            let mut ok = true;
            for &j in &self.covers[next] {
                supply[j] -= 1;
                if supply[j] < demand[j] {
                    ok = false;
                }
            }
            if ok {
                self.dfs(next + 1, cost, sel, demand, supply);
            }
            for &j in &self.covers[next] {
                supply[j] += 1;
            }
        }
    }

    let mut search = Search {
        inst,
        covers: &covers,
        best_cost: f64::INFINITY,
        best_sel: Vec::new(),
    };
    let mut sel = Vec::new();
    search.dfs(0, 0.0, &mut sel, &mut demand, &mut supply);

    debug_assert!(inst.is_feasible(&search.best_sel));
    Ok(SelectionResult {
        total_cost: inst.cost_of(&search.best_sel),
        selected: search.best_sel,
        optimal: true,
    })
}

/// Greedy fallback: repeatedly pick the anchor with the best
/// satisfied-demand-per-cost ratio until every requirement is met.
/// Always feasible because requirements are clamped at build time.
pub fn solve_greedy(inst: &MulticoverInstance) -> SelectionResult {
    let n = inst.anchor_count();
    let mut covers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, cov) in inst.coverage.iter().enumerate() {
        for &i in cov {
            covers[i].push(j);
        }
    }
    let mut demand: Vec<i64> = inst.required.iter().map(|&r| r as i64).collect();
    let mut chosen = vec![false; n];
    let mut selected = Vec::new();

    while demand.iter().any(|&d| d > 0) {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if chosen[i] {
                continue;
            }
            let gain = covers[i].iter().filter(|&&j| demand[j] > 0).count();
            if gain == 0 {
                continue;
            }
            let ratio = gain as f64 / inst.costs[i];
            // strict improvement keeps the lowest index on ties
            if best.is_none_or(|(br, _)| ratio > br + 1e-12) {
                best = Some((ratio, i));
            }
        }
        let (_, i) = best.expect("instance feasible by construction");
        chosen[i] = true;
        selected.push(i);
        for &j in &covers[i] {
            demand[j] -= 1;
        }
    }
    selected.sort_unstable();
    SelectionResult {
        total_cost: inst.cost_of(&selected),
        selected,
        optimal: false,
    }
}

/// Outcome of one compaction pass.
#[derive(Clone, Debug)]
pub struct CompactionReport {
    pub removed: Vec<AnchorId>,
    pub kept: Vec<AnchorId>,
    pub total_cost: f64,
    pub optimal: bool,
}

/// Prune unselected anchors from the graph. Object nodes are never
/// removed; every object keeps at least r_j observers.
pub fn compact(graph: &mut CognitiveMemoryGraph, r: u32, exact_limit: usize) -> CompactionReport {
    let inst = build_instance(graph, r);
    let solution = match solve_exact(&inst, exact_limit) {
        Ok(s) => s,
        Err(CoverError::TooLarge { .. }) => solve_greedy(&inst),
    };
    let keep: std::collections::BTreeSet<usize> = solution.selected.iter().copied().collect();
    let removed: Vec<AnchorId> = inst
        .anchor_ids
        .iter()
        .enumerate()
        .filter(|(i, _)| !keep.contains(i))
        .map(|(_, id)| *id)
        .collect();
    let kept: Vec<AnchorId> = solution.selected.iter().map(|&i| inst.anchor_ids[i]).collect();
    graph.remove_anchors(&removed);
    CompactionReport {
        removed,
        kept,
        total_cost: solution.total_cost,
        optimal: solution.optimal,
    }
}
