//! The simulation harness: episode orchestration over scripted scenes,
//! policy variants for the ablation axes, suite running, and SR/SPL.

mod episode;
mod metrics;
pub mod scenegen;
mod suite;
mod trace;

pub use episode::{run_episode, run_episode_capture, shortest_to_targets, EpisodeSpec};
pub use metrics::{compute_metrics, EpisodeResult, Metrics, Outcome};
pub use suite::{load_suite, run_suite, sign_test_p, SuiteFile, SuiteResult, SUITE_FORMAT, SUITE_VERSION};
pub use trace::{TraceEvent, TraceLog};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory::MergeConfig;
use crate::planner::PlannerConfig;
use crate::reasoning::WorkerConfig;
use crate::utility::UtilityConfig;
use crate::world::SensorSpec;
use crate::wtrp::MotionConfig;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config: {0}")]
    Config(String),
    #[error("no recognizable target in instruction {0:?}")]
    NoTarget(String),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("planner: {0}")]
    Plan(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Goal-selection policy; the non-full variants reproduce the ablation
/// axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// WTRP ordering over the full frontier score.
    Full,
    /// Argmax frontier score, no tour optimization.
    GreedyGoal,
    /// Structural-semantic term ablated.
    NoStruct,
    /// Out-of-boundary visual term ablated.
    NoVis,
}

impl Policy {
    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Full => "full",
            Policy::GreedyGoal => "greedy-goal",
            Policy::NoStruct => "no-struct",
            Policy::NoVis => "no-vis",
        }
    }

    pub fn parse(s: &str) -> Option<Policy> {
        match s {
            "full" => Some(Policy::Full),
            "greedy-goal" => Some(Policy::GreedyGoal),
            "no-struct" => Some(Policy::NoStruct),
            "no-vis" => Some(Policy::NoVis),
            _ => None,
        }
    }

    pub const ALL: [Policy; 4] = [
        Policy::Full,
        Policy::GreedyGoal,
        Policy::NoStruct,
        Policy::NoVis,
    ];
}

/// Harness knobs: sensing, cadence, and solver limits.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub sensor: SensorSpec,
    /// Seconds of simulated time per tick.
    pub dt: f64,
    pub robot_radius: f64,
    /// Compact when the anchor count exceeds this.
    pub anchor_budget: usize,
    /// Coverage redundancy target for compaction.
    pub coverage_r: u32,
    pub cover_exact_limit: usize,
    pub wtrp_exact_limit: usize,
    /// Reasoning budget per tick in the deterministic inline driver.
    pub tasks_per_tick: usize,
    /// Points sampled per detected object.
    pub points_per_object: usize,
    /// Run the reasoning worker on its own thread. Wall-clock decoupled
    /// but no longer tick-reproducible; the inline default is.
    pub async_reasoning: bool,
    /// Record oracle latencies into the trace (breaks byte-identical
    /// trace comparisons across machines; off by default).
    pub trace_timing: bool,
    /// Score frontiers through the parallel path when compiled in.
    pub parallel_scoring: bool,
    pub worker: WorkerConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            sensor: SensorSpec::default(),
            dt: 0.5,
            robot_radius: 0.2,
            anchor_budget: 64,
            coverage_r: 2,
            cover_exact_limit: 24,
            wtrp_exact_limit: 12,
            tasks_per_tick: 1,
            points_per_object: 24,
            async_reasoning: false,
            trace_timing: false,
            parallel_scoring: true,
            worker: WorkerConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.dt <= 0.0 {
            return Err(SimError::Config("dt must be positive".into()));
        }
        if self.sensor.range <= 0.0 || self.sensor.fov <= 0.0 {
            return Err(SimError::Config("sensor range and fov must be positive".into()));
        }
        if self.tasks_per_tick == 0 {
            return Err(SimError::Config("tasks_per_tick must be positive".into()));
        }
        if self.points_per_object == 0 {
            return Err(SimError::Config("points_per_object must be positive".into()));
        }
        if self.coverage_r == 0 {
            return Err(SimError::Config("coverage_r must be >= 1".into()));
        }
        Ok(())
    }
}

/// Every module's configuration in one document. Layering: built-in
/// defaults, then the config file, then individual CLI flags.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub sim: SimConfig,
    pub merge: MergeConfig,
    pub utility: UtilityConfig,
    pub motion: MotionConfig,
    pub planner: PlannerConfig,
}

impl RunConfig {
    /// Whole-document validation before any run.
    pub fn validate(&self) -> Result<(), SimError> {
        self.sim.validate()?;
        self.merge
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        self.utility.validate().map_err(SimError::Config)?;
        self.motion.validate().map_err(SimError::Config)?;
        if self.planner.snap_radius <= 0.0 || self.planner.capture_radius <= 0.0 {
            return Err(SimError::Config(
                "planner radii must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Defaults overridden by an optional JSON file. Unknown keys are
    /// rejected with the offending key named.
    pub fn load_layered(path: Option<&std::path::Path>) -> Result<RunConfig, SimError> {
        let cfg = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                serde_json::from_str(&text)?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
