//! The semantic oracle: one interface for every model-dependent judgment
//! (similarity scoring, instruction decomposition, subgraph reasoning),
//! with a deterministic mock for hermetic runs and a remote client for a
//! hosted model service.

mod mock;
mod remote;
mod tables;

pub use mock::{DelayOracle, MockOracle, OracleCallCounts};
pub use remote::{RemoteOracle, ENV_TIMEOUT_MS, ENV_URL};
pub use tables::{AffinityEntry, OracleTables, TABLES_FORMAT, TABLES_VERSION};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory::{AnchorId, CognitiveMemoryGraph, SymbolicView};

/// A natural-language task.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Instruction {
    pub text: String,
    /// Episode-scoped identifier.
    pub id: String,
}

impl Instruction {
    pub fn new(text: &str, id: &str) -> Self {
        Instruction {
            text: text.to_string(),
            id: id.to_string(),
        }
    }
}

/// Targets complete the task; related objects hint at where targets live.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstructionDecomposition {
    pub targets: BTreeSet<String>,
    pub related: BTreeSet<String>,
}

/// Outcome of reasoning over one subgraph.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReasoningVerdict {
    pub visible: bool,
    /// Required when visible.
    pub anchor_id: Option<AnchorId>,
    /// [x, y, width, height] in the anchor's observation frame.
    pub bbox: Option<[f64; 4]>,
    pub evidence: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    /// The instruction names no recognizable target; the episode fails fast.
    #[error("no recognizable target in instruction")]
    NoTarget,
    /// Transient failure; the reasoning worker retries with backoff.
    #[error("retryable oracle failure: {0}")]
    Retryable(String),
}

/// What similarity is being asked about.
#[derive(Clone, Copy, Debug)]
pub enum Subject<'a> {
    /// An object category label.
    Label(&'a str),
    /// An anchor's symbolic view (out-of-boundary evidence).
    AnchorView(&'a SymbolicView),
}

/// The pluggable model interface. Implementations must be shareable across
/// threads; `reason_subgraph` may block and is only ever called from the
/// reasoning worker.
pub trait SemanticOracle: Send + Sync {
    /// Similarity between a subject and the instruction, in [0, 1].
    /// Deterministic for fixed inputs.
    fn similarity(&self, subject: Subject<'_>, instruction: &Instruction) -> f64;

    /// Split the instruction into target and related label sets.
    fn decompose(&self, instruction: &Instruction)
        -> Result<InstructionDecomposition, OracleError>;

    /// Judge whether the target is visible in the subgraph and, if so,
    /// through which anchor.
    fn reason_subgraph(
        &self,
        subgraph: &CognitiveMemoryGraph,
        instruction: &Instruction,
    ) -> Result<ReasoningVerdict, OracleError>;
}

impl ReasoningVerdict {
    pub fn not_visible(evidence: String) -> Self {
        ReasoningVerdict {
            visible: false,
            anchor_id: None,
            bbox: None,
            evidence,
        }
    }

    /// Structural invariant: visible implies an anchor id.
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.visible && self.anchor_id.is_none() {
            return Err(OracleError::Retryable(
                "verdict visible without anchor id".into(),
            ));
        }
        Ok(())
    }
}
