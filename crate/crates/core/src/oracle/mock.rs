//! Deterministic mock oracle: token matching plus the affinity and
//! co-occurrence tables, with call counters for instrumented tests.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use crate::geom::Vec2;
use crate::memory::{AnchorId, CognitiveMemoryGraph, ObjectId};

use super::{
    Instruction, InstructionDecomposition, OracleError, OracleTables, ReasoningVerdict,
    SemanticOracle, Subject,
};

const STOPWORDS: &[&str] = &[
    "find", "the", "go", "to", "a", "an", "near", "me", "please", "where", "is", "locate",
    "reach", "walk", "and", "then", "of", "look", "for", "next",
];

/// Number of tokens after "near" in which a vocabulary match counts as
/// related rather than target.
const NEAR_WINDOW: usize = 3;

fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

pub struct MockOracle {
    tables: OracleTables,
    visibility_threshold: f64,
    label_similarity_calls: AtomicU64,
    anchor_similarity_calls: AtomicU64,
    decompose_calls: AtomicU64,
    reason_calls: AtomicU64,
}

/// Snapshot of the mock's call counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleCallCounts {
    pub label_similarity: u64,
    pub anchor_similarity: u64,
    pub decompose: u64,
    pub reason: u64,
}

impl MockOracle {
    pub fn new(tables: OracleTables, visibility_threshold: f64) -> Self {
        MockOracle {
            tables,
            visibility_threshold,
            label_similarity_calls: AtomicU64::new(0),
            anchor_similarity_calls: AtomicU64::new(0),
            decompose_calls: AtomicU64::new(0),
            reason_calls: AtomicU64::new(0),
        }
    }

    pub fn with_defaults() -> Self {
        Self::new(OracleTables::default(), 0.8)
    }

    pub fn counts(&self) -> OracleCallCounts {
        OracleCallCounts {
            label_similarity: self.label_similarity_calls.load(Ordering::Relaxed),
            anchor_similarity: self.anchor_similarity_calls.load(Ordering::Relaxed),
            decompose: self.decompose_calls.load(Ordering::Relaxed),
            reason: self.reason_calls.load(Ordering::Relaxed),
        }
    }

    pub fn tables(&self) -> &OracleTables {
        &self.tables
    }

    /// Exact phrase match scores 1.0; otherwise the best affinity between
    /// the label and any instruction token or recognized phrase.
    fn label_score(&self, label: &str, instruction: &Instruction) -> f64 {
        let tokens = tokenize(&instruction.text);
        let label_tokens = tokenize(label);
        if contains_phrase(&tokens, &label_tokens) {
            return 1.0;
        }
        let mut best = 0.0_f64;
        for t in &tokens {
            best = best.max(self.tables.affinity(label, t));
        }
        for phrase in find_vocab_phrases(&tokens, &self.tables) {
            best = best.max(self.tables.affinity(label, &phrase.label));
        }
        best.clamp(0.0, 1.0)
    }
}

fn contains_phrase(tokens: &[String], phrase: &[String]) -> bool {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return false;
    }
    tokens.windows(phrase.len()).any(|w| w == phrase)
}

struct PhraseMatch {
    label: String,
    /// Index of the first token of the match.
    start: usize,
}

/// Greedy longest-phrase scan of the instruction against the vocabulary.
fn find_vocab_phrases(tokens: &[String], tables: &OracleTables) -> Vec<PhraseMatch> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut matched = 0;
        for len in (1..=3.min(tokens.len() - i)).rev() {
            let phrase = tokens[i..i + len].join(" ");
            if tables.vocabulary.contains(&phrase) {
                out.push(PhraseMatch {
                    label: phrase,
                    start: i,
                });
                matched = len;
                break;
            }
        }
        i += matched.max(1);
    }
    out
}

impl SemanticOracle for MockOracle {
    fn similarity(&self, subject: Subject<'_>, instruction: &Instruction) -> f64 {
        match subject {
            Subject::Label(label) => {
                self.label_similarity_calls.fetch_add(1, Ordering::Relaxed);
                self.label_score(label, instruction)
            }
            Subject::AnchorView(view) => {
                self.anchor_similarity_calls.fetch_add(1, Ordering::Relaxed);
                view.labels()
                    .map(|l| self.label_score(l, instruction))
                    .fold(0.0, f64::max)
            }
        }
    }

    fn decompose(
        &self,
        instruction: &Instruction,
    ) -> Result<InstructionDecomposition, OracleError> {
        self.decompose_calls.fetch_add(1, Ordering::Relaxed);
        let tokens = tokenize(&instruction.text);
        let near_positions: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.as_str() == "near")
            .map(|(i, _)| i)
            .collect();

        let mut decomposition = InstructionDecomposition::default();
        for m in find_vocab_phrases(&tokens, &self.tables) {
            if STOPWORDS.contains(&m.label.as_str()) {
                continue;
            }
            let in_near_clause = near_positions
                .iter()
                .any(|&p| m.start > p && m.start - p <= NEAR_WINDOW);
            if in_near_clause {
                decomposition.related.insert(m.label);
            } else {
                decomposition.targets.insert(m.label);
            }
        }
        if decomposition.targets.is_empty() {
            return Err(OracleError::NoTarget);
        }
        for t in decomposition.targets.clone() {
            decomposition.related.extend(self.tables.related_to(&t));
        }
        for t in &decomposition.targets {
            decomposition.related.remove(t);
        }
        Ok(decomposition)
    }

    fn reason_subgraph(
        &self,
        subgraph: &CognitiveMemoryGraph,
        instruction: &Instruction,
    ) -> Result<ReasoningVerdict, OracleError> {
        self.reason_calls.fetch_add(1, Ordering::Relaxed);

        // best object at or above the visibility threshold; ties -> lower id
        let mut best: Option<(f64, ObjectId)> = None;
        for obj in subgraph.objects() {
            let s = self.label_score(&obj.label, instruction);
            if s >= self.visibility_threshold && best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, obj.id));
            }
        }
        let Some((score, object_id)) = best else {
            return Ok(ReasoningVerdict::not_visible(
                "no object matches the instruction".into(),
            ));
        };

        // anchor observing the object with the most co-observed objects in
        // this subgraph; ties -> lower id
        let mut best_anchor: Option<(usize, AnchorId)> = None;
        for &a in &subgraph.observers_of(object_id) {
            let degree = subgraph.observed_by(a).len();
            if best_anchor.is_none_or(|(bd, _)| degree > bd) {
                best_anchor = Some((degree, a));
            }
        }
        let (_, anchor_id) = best_anchor.expect("visible object has an observer");

        let anchor = subgraph.anchor(anchor_id).expect("anchor in subgraph");
        let obj = subgraph.object(object_id).expect("object in subgraph");
        let bbox = project_extent(obj.extent.min, obj.extent.max, anchor.pose.position, anchor.pose.heading);

        Ok(ReasoningVerdict {
            visible: true,
            anchor_id: Some(anchor_id),
            bbox: Some(bbox),
            evidence: format!(
                "{} matched with similarity {:.3} via anchor {}",
                obj.label, score, anchor_id.0
            ),
        })
    }
}

/// Footprint corners transformed into the anchor frame, reduced to an
/// axis-aligned [x, y, w, h] box.
fn project_extent(min: [f64; 3], max: [f64; 3], origin: Vec2, heading: f64) -> [f64; 4] {
    let (sin, cos) = heading.sin_cos();
    let corners = [
        Vec2::new(min[0], min[1]),
        Vec2::new(max[0], min[1]),
        Vec2::new(min[0], max[1]),
        Vec2::new(max[0], max[1]),
    ];
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in corners {
        let d = c - origin;
        let local = Vec2::new(d.x * cos + d.y * sin, -d.x * sin + d.y * cos);
        lo.x = lo.x.min(local.x);
        lo.y = lo.y.min(local.y);
        hi.x = hi.x.max(local.x);
        hi.y = hi.y.max(local.y);
    }
    [lo.x, lo.y, hi.x - lo.x, hi.y - lo.y]
}

/// Wrapper that injects latency into `reason_subgraph` (the slow model
/// call); the lightweight similarity path stays fast, mirroring the split
/// between the real-time scorer and the reasoning model.
pub struct DelayOracle<O> {
    inner: O,
    reason_delay: Duration,
}

impl<O> DelayOracle<O> {
    pub fn new(inner: O, reason_delay: Duration) -> Self {
        DelayOracle {
            inner,
            reason_delay,
        }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: SemanticOracle> SemanticOracle for DelayOracle<O> {
    fn similarity(&self, subject: Subject<'_>, instruction: &Instruction) -> f64 {
        self.inner.similarity(subject, instruction)
    }

    fn decompose(
        &self,
        instruction: &Instruction,
    ) -> Result<InstructionDecomposition, OracleError> {
        self.inner.decompose(instruction)
    }

    fn reason_subgraph(
        &self,
        subgraph: &CognitiveMemoryGraph,
        instruction: &Instruction,
    ) -> Result<ReasoningVerdict, OracleError> {
        std::thread::sleep(self.reason_delay);
        self.inner.reason_subgraph(subgraph, instruction)
    }
}
