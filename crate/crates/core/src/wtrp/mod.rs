//! Goal selection as a Weighted Traveling Repairman Problem: frontier
//! scores become visit weights, motion-aware transition costs fill the
//! matrix, and the solver orders candidates to minimize weighted
//! cumulative latency. The first node of the optimal order is the
//! mid-term goal.

mod solve;

pub use solve::{solve_exact, solve_heuristic};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{angle_diff, Pose, Vec2};
use crate::world::Frontier;

/// Default candidate-count ceiling for the exact solver.
pub const DEFAULT_EXACT_LIMIT: usize = 12;

/// Below this speed the agent counts as stationary and the motion
/// consistency term vanishes.
const EPSILON_V: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum WtrpError {
    #[error("instance has {n} candidates, exact limit is {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("no frontier available")]
    NoFrontier,
    #[error("instance io: {0}")]
    Io(#[from] std::io::Error),
    #[error("instance parse: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Motion limits and cost coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionConfig {
    /// Maximum linear velocity, m/s.
    pub v_max: f64,
    /// Maximum angular velocity, rad/s.
    pub xi_dot_max: f64,
    /// Weight of the motion-consistency term, s/rad.
    pub w_c: f64,
    /// Weight of the local-structure term, s.
    pub w_f: f64,
    /// Openness truncation, meters.
    pub h_max: f64,
    /// Temperature of the exponential reweighting.
    pub beta: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            v_max: 1.0,
            xi_dot_max: std::f64::consts::FRAC_PI_2,
            w_c: 0.5,
            w_f: 2.0,
            h_max: 5.0,
            beta: 3.0,
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("v_max", self.v_max),
            ("xi_dot_max", self.xi_dot_max),
            ("w_c", self.w_c),
            ("w_f", self.w_f),
            ("h_max", self.h_max),
            ("beta", self.beta),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(format!("{name} must be strictly positive"));
            }
        }
        Ok(())
    }
}

pub const INSTANCE_FORMAT: &str = "wtrp-instance";
pub const INSTANCE_VERSION: u32 = 1;

/// A solver-ready instance. Row/column 0 of the matrix is the current
/// robot state; candidates are 1..=n. Column 0 is all zeros because the
/// tour never returns.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WtrpInstance {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default = "default_version")]
    pub version: u32,
    pub weights: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

fn default_format() -> String {
    INSTANCE_FORMAT.to_string()
}

fn default_version() -> u32 {
    INSTANCE_VERSION
}

impl WtrpInstance {
    pub fn new(weights: Vec<f64>, matrix: Vec<Vec<f64>>) -> Self {
        WtrpInstance {
            format: default_format(),
            version: default_version(),
            weights,
            matrix,
            metadata: None,
        }
    }

    pub fn candidate_count(&self) -> usize {
        self.weights.len()
    }

    /// Check every structural invariant, naming the violated one.
    pub fn validate(&self) -> Result<(), WtrpError> {
        let n = self.weights.len();
        if self.format != INSTANCE_FORMAT || self.version != INSTANCE_VERSION {
            return Err(WtrpError::Invalid(format!(
                "unsupported header {}/{}",
                self.format, self.version
            )));
        }
        if n == 0 {
            return Err(WtrpError::Invalid("no candidates".into()));
        }
        if self.matrix.len() != n + 1 || self.matrix.iter().any(|r| r.len() != n + 1) {
            return Err(WtrpError::Invalid(format!(
                "matrix must be {}x{} for {} candidates",
                n + 1,
                n + 1,
                n
            )));
        }
        for w in &self.weights {
            if !w.is_finite() || *w <= 0.0 || *w > 1.0 {
                return Err(WtrpError::Invalid(format!("weight {w} outside (0, 1]")));
            }
        }
        for (i, row) in self.matrix.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(WtrpError::Invalid(format!(
                        "matrix[{i}][{j}] = {v} must be finite and non-negative"
                    )));
                }
            }
        }
        for (k, row) in self.matrix.iter().enumerate() {
            if row[0] != 0.0 {
                return Err(WtrpError::Invalid(format!(
                    "matrix[{k}][0] must be 0 (no return leg)"
                )));
            }
        }
        for i in 1..=n {
            for j in (i + 1)..=n {
                if (self.matrix[i][j] - self.matrix[j][i]).abs() > 1e-9 {
                    return Err(WtrpError::Invalid(format!(
                        "interior must be symmetric: matrix[{i}][{j}] != matrix[{j}][{i}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<WtrpInstance, WtrpError> {
        let text = std::fs::read_to_string(path)?;
        let inst: WtrpInstance = serde_json::from_str(&text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), WtrpError> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// A visiting order with its weighted-latency accounting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    /// Candidate indexes (1-based, matching the matrix), visit order.
    pub order: Vec<usize>,
    /// Cumulative arrival times C_i, one per visited candidate.
    pub cumulative: Vec<f64>,
    /// Sum of weight x arrival time over the order.
    pub objective: f64,
    pub optimal: bool,
}

/// Canonical objective evaluation: arrival times by successive addition,
/// contributions accumulated in visit order.
pub fn evaluate_order(inst: &WtrpInstance, order: &[usize]) -> (Vec<f64>, f64) {
    let mut cumulative = Vec::with_capacity(order.len());
    let mut time = 0.0;
    let mut objective = 0.0;
    let mut prev = 0usize;
    for &k in order {
        time += inst.matrix[prev][k];
        cumulative.push(time);
        objective += inst.weights[k - 1] * time;
        prev = k;
    }
    (cumulative, objective)
}

/// Min-max normalize scores and apply exponential reweighting; the result
/// lives in (0, 1]. When all scores are equal the normalized value is 1
/// for every candidate (maximal weight, pure latency minimization).
pub fn utility_weights(scores: &[f64], beta: f64) -> Vec<f64> {
    assert!(!scores.is_empty(), "at least one score required");
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    scores
        .iter()
        .map(|&s| {
            let norm = if span <= 1e-12 { 1.0 } else { (s - min) / span };
            (beta * (norm - 1.0)).exp()
        })
        .collect()
}

/// Nominal travel time between two posed nodes: the slower of the
/// translation at v_max and the heading change at xi_dot_max.
pub fn nominal_cost(a: &Pose, b: &Pose, cfg: &MotionConfig) -> f64 {
    let d = a.position.dist(b.position);
    let dh = angle_diff(a.heading, b.heading);
    (d / cfg.v_max).max(dh / cfg.xi_dot_max)
}

/// Motion-consistency penalty: angle between the displacement to the
/// candidate and the current velocity, in [0, pi]. Zero for a stationary
/// agent or a candidate at the agent position.
pub fn consistency_cost(candidate: Vec2, agent: &Pose) -> f64 {
    let v = agent.velocity;
    if v.norm() < EPSILON_V {
        return 0.0;
    }
    let d = candidate - agent.position;
    let dn = d.norm();
    if dn < 1e-12 {
        return 0.0;
    }
    (d.dot(v) / (dn * v.norm())).clamp(-1.0, 1.0).acos()
}

/// Local-structure term: openness normalized by its truncation.
pub fn structure_cost(frontier: &Frontier, cfg: &MotionConfig) -> f64 {
    frontier.openness / cfg.h_max
}

/// Assemble the instance: weights from the scores, first row with the
/// consistency and structure terms, symmetric nominal interior, zero
/// return column. Candidate headings are the viewpoint headings.
pub fn build_instance(
    agent: &Pose,
    frontiers: &[Frontier],
    scores: &[f64],
    cfg: &MotionConfig,
) -> WtrpInstance {
    assert!(!frontiers.is_empty(), "at least one candidate required");
    assert_eq!(frontiers.len(), scores.len());
    let n = frontiers.len();
    let weights = utility_weights(scores, cfg.beta);

    let mut matrix = vec![vec![0.0; n + 1]; n + 1];
    for (k, f) in frontiers.iter().enumerate() {
        let t = nominal_cost(agent, &f.viewpoint, cfg);
        let c_c = consistency_cost(f.viewpoint.position, agent);
        let c_s = structure_cost(f, cfg);
        matrix[0][k + 1] = t + cfg.w_c * c_c + cfg.w_f * c_s;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let t = nominal_cost(&frontiers[i].viewpoint, &frontiers[j].viewpoint, cfg);
            matrix[i + 1][j + 1] = t;
            matrix[j + 1][i + 1] = t;
        }
    }
    WtrpInstance::new(weights, matrix)
}

/// The selected mid-term goal plus the residual order as global guidance.
#[derive(Clone, Debug)]
pub struct GoalSelection {
    /// Index into the frontier slice handed to `select_goal`.
    pub frontier_index: usize,
    pub goal: Pose,
    /// Full visit order as frontier indexes.
    pub order: Vec<usize>,
    pub tour: Tour,
}

/// Build, solve (exact when small enough, else heuristic), and pick the
/// first node of the order as the mid-term goal.
pub fn select_goal(
    agent: &Pose,
    frontiers: &[Frontier],
    scores: &[f64],
    cfg: &MotionConfig,
    exact_limit: usize,
) -> Result<GoalSelection, WtrpError> {
    if frontiers.is_empty() {
        return Err(WtrpError::NoFrontier);
    }
    let inst = build_instance(agent, frontiers, scores, cfg);
    let tour = if frontiers.len() <= exact_limit {
        solve_exact(&inst, exact_limit)?
    } else {
        solve_heuristic(&inst)
    };
    let order: Vec<usize> = tour.order.iter().map(|&k| k - 1).collect();
    let first = order[0];
    Ok(GoalSelection {
        frontier_index: first,
        goal: frontiers[first].viewpoint,
        order,
        tour,
    })
}
