//! Structured episode traces: an in-memory event list that serializes to
//! JSONL. Wall-clock fields are omitted unless timing capture is enabled,
//! so default traces are byte-identical across runs of the same seed.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::geom::stable_hash;
use crate::reasoning::TaskKind;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    EpisodeStart {
        episode: String,
        instruction: String,
        seed: u64,
        policy: String,
    },
    Tick {
        step: u64,
        x: f64,
        y: f64,
        heading: f64,
    },
    AnchorSelected {
        step: u64,
        anchor: u64,
        objects: usize,
    },
    Compaction {
        step: u64,
        removed: usize,
        kept: usize,
        optimal: bool,
    },
    OracleCall {
        step: u64,
        kind: TaskKind,
        priority: f64,
        visible: bool,
        failed: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        latency_us: Option<u64>,
    },
    GoalSelected {
        step: u64,
        mode: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        frontier: Option<usize>,
        n_frontiers: usize,
        x: f64,
        y: f64,
        /// Score of the chosen frontier (explore mode only).
        #[serde(skip_serializing_if = "Option::is_none")]
        score: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        objective: Option<f64>,
    },
    TargetFound {
        step: u64,
        anchor: u64,
        x: f64,
        y: f64,
    },
    Replan {
        step: u64,
        reason: String,
    },
    EpisodeEnd {
        step: u64,
        outcome: String,
        success: bool,
        actual_length: f64,
        shortest_length: f64,
    },
}

#[derive(Clone, Debug, Default)]
pub struct TraceLog {
    pub events: Vec<TraceEvent>,
}

impl TraceLog {
    pub fn push(&mut self, e: TraceEvent) {
        self.events.push(e);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_jsonl().as_bytes())
    }

    /// Stable hash of the serialized trace; the determinism fingerprint.
    pub fn hash(&self) -> u64 {
        stable_hash(self.to_jsonl().as_bytes())
    }
}
