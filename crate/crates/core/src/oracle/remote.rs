//! Remote oracle client: blocking JSON-over-HTTP to a model service.
//! Requests carry the instruction, anchor descriptors, and object labels;
//! responses are validated strictly and any transport or schema failure
//! surfaces as a retryable error.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::memory::{AnchorId, CognitiveMemoryGraph};

use super::{
    Instruction, InstructionDecomposition, OracleError, ReasoningVerdict, SemanticOracle, Subject,
};

pub const ENV_URL: &str = "ORACLE_URL";
pub const ENV_TIMEOUT_MS: &str = "ORACLE_TIMEOUT_MS";
const DEFAULT_TIMEOUT_MS: u64 = 10_000;

pub struct RemoteOracle {
    agent: ureq::Agent,
    base_url: String,
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SubjectPayload {
    Label { label: String },
    Anchor { labels: Vec<String> },
}

#[derive(Serialize)]
struct SimilarityRequest<'a> {
    instruction: &'a Instruction,
    subject: SubjectPayload,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimilarityResponse {
    score: f64,
}

#[derive(Serialize)]
struct DecomposeRequest<'a> {
    instruction: &'a Instruction,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecomposeResponse {
    targets: Vec<String>,
    #[serde(default)]
    related: Vec<String>,
}

#[derive(Serialize)]
struct AnchorDescriptor {
    id: AnchorId,
    labels: Vec<String>,
}

#[derive(Serialize)]
struct ReasonRequest<'a> {
    instruction: &'a Instruction,
    anchors: Vec<AnchorDescriptor>,
    objects: Vec<String>,
}

impl RemoteOracle {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        RemoteOracle {
            agent,
            base_url: base_url.trim_end_matches('/').to_string(),
        }
    }

    /// Construct from `ORACLE_URL` / `ORACLE_TIMEOUT_MS`.
    pub fn from_env() -> Result<Self, OracleError> {
        let url = std::env::var(ENV_URL)
            .map_err(|_| OracleError::Retryable(format!("{ENV_URL} not set")))?;
        let timeout_ms = std::env::var(ENV_TIMEOUT_MS)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(DEFAULT_TIMEOUT_MS);
        Ok(Self::new(&url, Duration::from_millis(timeout_ms)))
    }

    fn post<T: serde::de::DeserializeOwned>(
        &self,
        endpoint: &str,
        body: &impl Serialize,
    ) -> Result<T, OracleError> {
        let url = format!("{}/{}", self.base_url, endpoint);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| OracleError::Retryable(format!("{endpoint}: {e}")))?;
        resp.body_mut()
            .read_json::<T>()
            .map_err(|e| OracleError::Retryable(format!("{endpoint} response: {e}")))
    }
}

impl SemanticOracle for RemoteOracle {
    /// Transport failures degrade to 0.0 here: the similarity path feeds
    /// real-time prioritization and has no error channel; reasoning
    /// correctness flows through `reason_subgraph`, which does.
    fn similarity(&self, subject: Subject<'_>, instruction: &Instruction) -> f64 {
        let payload = match subject {
            Subject::Label(l) => SubjectPayload::Label { label: l.to_string() },
            Subject::AnchorView(view) => SubjectPayload::Anchor {
                labels: view.labels().map(String::from).collect(),
            },
        };
        let req = SimilarityRequest {
            instruction,
            subject: payload,
        };
        match self.post::<SimilarityResponse>("similarity", &req) {
            Ok(r) if (0.0..=1.0).contains(&r.score) => r.score,
            _ => 0.0,
        }
    }

    fn decompose(
        &self,
        instruction: &Instruction,
    ) -> Result<InstructionDecomposition, OracleError> {
        let resp: DecomposeResponse =
            self.post("decompose", &DecomposeRequest { instruction })?;
        if resp.targets.is_empty() {
            return Err(OracleError::NoTarget);
        }
        let decomposition = InstructionDecomposition {
            targets: resp.targets.into_iter().collect(),
            related: resp.related.into_iter().collect(),
        };
        if decomposition
            .targets
            .intersection(&decomposition.related)
            .next()
            .is_some()
        {
            return Err(OracleError::Retryable(
                "decompose: targets and related overlap".into(),
            ));
        }
        Ok(decomposition)
    }

    fn reason_subgraph(
        &self,
        subgraph: &CognitiveMemoryGraph,
        instruction: &Instruction,
    ) -> Result<ReasoningVerdict, OracleError> {
        let req = ReasonRequest {
            instruction,
            anchors: subgraph
                .anchors()
                .map(|a| AnchorDescriptor {
                    id: a.id,
                    labels: a.view.labels().map(String::from).collect(),
                })
                .collect(),
            objects: subgraph.objects().map(|o| o.label.clone()).collect(),
        };
        let verdict: ReasoningVerdict = self.post("reason", &req)?;
        verdict.validate()?;
        if let Some(id) = verdict.anchor_id {
            if subgraph.anchor(id).is_none() {
                return Err(OracleError::Retryable(format!(
                    "reason: anchor {} not in the queried subgraph",
                    id.0
                )));
            }
        }
        Ok(verdict)
    }
}
