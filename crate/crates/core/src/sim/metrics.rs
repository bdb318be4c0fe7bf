//! Episode outcomes and the SR/SPL accounting.

use serde::{Deserialize, Serialize};

use super::trace::TraceLog;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    /// Stopped near something that is not a ground-truth target.
    FalsePositive,
    /// Ran out of unexplored frontiers without locating the target.
    NoFrontier,
    /// Hit the step limit.
    Stepout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::FalsePositive => "false_positive",
            Outcome::NoFrontier => "no_frontier",
            Outcome::Stepout => "stepout",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub success: bool,
    pub outcome: Outcome,
    /// Path length actually traversed, meters.
    pub actual_length: f64,
    /// Shortest path from start into the success region, meters.
    pub shortest_length: f64,
    pub steps: u64,
    /// Wall-clock duration of the perception loop itself, excluding scene
    /// preparation and worker teardown. Perf telemetry only.
    pub loop_seconds: f64,
    pub trace: TraceLog,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub episodes: usize,
    pub sr: f64,
    pub spl: f64,
    pub successes: usize,
    pub false_positives: usize,
    pub no_frontier: usize,
    pub stepout: usize,
}

/// SR is the success fraction; SPL discounts each success by
/// `l_s / max(l_s, l_a)`. A success with both lengths (near) zero counts
/// as a full SPL term: the agent started inside the success region and
/// stopped immediately.
pub fn compute_metrics(results: &[EpisodeResult]) -> Metrics {
    assert!(!results.is_empty(), "at least one result required");
    let n = results.len() as f64;
    let mut m = Metrics {
        episodes: results.len(),
        ..Default::default()
    };
    let mut spl_sum = 0.0;
    for r in results {
        match r.outcome {
            Outcome::Success => m.successes += 1,
            Outcome::FalsePositive => m.false_positives += 1,
            Outcome::NoFrontier => m.no_frontier += 1,
            Outcome::Stepout => m.stepout += 1,
        }
        if r.success {
            let denom = r.shortest_length.max(r.actual_length);
            spl_sum += if denom < 1e-12 {
                1.0
            } else {
                r.shortest_length / denom
            };
        }
    }
    m.sr = m.successes as f64 / n;
    m.spl = spl_sum / n;
    m
}
