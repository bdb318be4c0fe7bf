//! The cognitive memory graph: a bipartite graph of visual anchors and
//! merged object nodes, built incrementally from simulated detections.

mod io;

pub use io::{load_graph, save_graph, GRAPH_FORMAT, GRAPH_VERSION};

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{angle_diff, stable_hash, Aabb, Pose, Vec2};

/// Dimension of the synthetic label embeddings. High enough that distinct
/// labels stay near-orthogonal (cosine concentration ~ 1/sqrt(dim)).
pub const EMBEDDING_DIM: usize = 128;

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct AnchorId(pub u64);

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ObjectId(pub u64);

/// One entry of an anchor's symbolic view.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ViewedObject {
    pub label: String,
    /// Bearing relative to the anchor heading, radians.
    pub bearing: f64,
}

/// Stand-in for the keyframe payload: the labels visible from the anchor
/// with their bearings.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SymbolicView {
    pub objects: Vec<ViewedObject>,
}

impl SymbolicView {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(|o| o.label.as_str())
    }
}

/// A retained keyframe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VisualAnchor {
    pub id: AnchorId,
    pub pose: Pose,
    pub view: SymbolicView,
    /// Monotone step index at capture time.
    pub timestamp: u64,
    /// Selection cost; defaults to 1.
    pub cost: f64,
}

/// A merged object instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObjectNode {
    pub id: ObjectId,
    pub label: String,
    pub points: Vec<[f64; 3]>,
    /// Unit-norm semantic feature.
    pub embedding: Vec<f64>,
    /// Mean of the points' (x, y).
    pub centroid: Vec2,
    /// Tight box around the points.
    pub extent: Aabb,
    pub observation_count: u32,
}

/// A detection before it is resolved against the graph.
#[derive(Clone, Debug)]
pub struct ObservedObject {
    pub label: String,
    pub points: Vec<[f64; 3]>,
    pub embedding: Vec<f64>,
}

impl ObservedObject {
    /// Build from sampled points with the label's synthetic embedding.
    pub fn from_points(label: &str, points: Vec<[f64; 3]>) -> Self {
        ObservedObject {
            label: label.to_string(),
            embedding: label_embedding(label),
            points,
        }
    }
}

/// Deterministic unit-norm embedding for a label. Equal labels map to the
/// same vector; distinct labels are near-orthogonal in expectation.
pub fn label_embedding(label: &str) -> Vec<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(stable_hash(label.as_bytes()));
    let mut v: Vec<f64> = (0..EMBEDDING_DIM)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= n;
    }
    v
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 1e-12 {
        for x in v {
            *x /= n;
        }
    }
}

/// Merge and anchor-selection thresholds.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MergeConfig {
    /// Weight of the geometric term in the joint similarity.
    pub lambda_geom: f64,
    /// Weight of the semantic term; the two must sum to 1.
    pub lambda_sem: f64,
    /// Merge when joint similarity strictly exceeds this.
    pub merge_threshold: f64,
    /// Translation threshold for anchor selection, meters.
    pub anchor_dist_threshold: f64,
    /// Rotation threshold for anchor selection, radians.
    pub anchor_rot_threshold: f64,
    /// Optional voxel size: when set, geometric similarity uses voxelized
    /// point-set IoU instead of AABB IoU.
    pub voxel_iou: Option<f64>,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            lambda_geom: 0.5,
            lambda_sem: 0.5,
            merge_threshold: 0.6,
            anchor_dist_threshold: 0.5,
            anchor_rot_threshold: 30f64.to_radians(),
            voxel_iou: None,
        }
    }
}

impl MergeConfig {
    pub fn validate(&self) -> Result<(), MemoryError> {
        if self.lambda_geom < 0.0 || self.lambda_sem < 0.0 {
            return Err(MemoryError::BadConfig("similarity weights must be >= 0".into()));
        }
        if (self.lambda_geom + self.lambda_sem - 1.0).abs() > 1e-9 {
            return Err(MemoryError::BadConfig(
                "lambda_geom + lambda_sem must equal 1".into(),
            ));
        }
        if self.merge_threshold <= 0.0 || self.merge_threshold >= 1.0 {
            return Err(MemoryError::BadConfig(
                "merge_threshold must be in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("duplicate anchor id {0:?}")]
    DuplicateAnchor(AnchorId),
    #[error("unknown anchor id {0:?}")]
    UnknownAnchor(AnchorId),
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("graph io: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("graph format: {0}")]
    Format(String),
}

/// Should the current frame become a visual anchor? True when a detection
/// label is new, or motion since the last anchor exceeds the thresholds.
/// The first frame (no previous anchor) is always selected.
pub fn should_select_anchor(
    pose: &Pose,
    last_anchor_pose: Option<&Pose>,
    detections: &[String],
    known_labels: &BTreeSet<String>,
    cfg: &MergeConfig,
) -> bool {
    if detections.iter().any(|l| !known_labels.contains(l)) {
        return true;
    }
    match last_anchor_pose {
        None => true,
        Some(last) => {
            pose.position.dist(last.position) > cfg.anchor_dist_threshold
                || angle_diff(pose.heading, last.heading) > cfg.anchor_rot_threshold
        }
    }
}

/// Joint geometric-semantic similarity in [0, 1].
pub fn object_similarity(a: &ObjectNode, b: &ObjectNode, cfg: &MergeConfig) -> f64 {
    let s_g = match cfg.voxel_iou {
        Some(voxel) => voxel_iou(&a.points, &b.points, voxel),
        None => a.extent.iou(&b.extent),
    };
    let s_s = cosine(&a.embedding, &b.embedding).max(0.0);
    cfg.lambda_geom * s_g + cfg.lambda_sem * s_s
}

/// IoU of the voxel sets occupied by two point clouds.
pub fn voxel_iou(a: &[[f64; 3]], b: &[[f64; 3]], voxel: f64) -> f64 {
    let key = |p: &[f64; 3]| {
        [
            (p[0] / voxel).floor() as i64,
            (p[1] / voxel).floor() as i64,
            (p[2] / voxel).floor() as i64,
        ]
    };
    let va: BTreeSet<_> = a.iter().map(key).collect();
    let vb: BTreeSet<_> = b.iter().map(key).collect();
    let inter = va.intersection(&vb).count();
    let union = va.union(&vb).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Per-incoming-object outcome of an insertion.
#[derive(Clone, Debug)]
pub struct ObjectResolution {
    pub object_id: ObjectId,
    pub merged: bool,
}

#[derive(Clone, Debug, Default)]
pub struct MergeReport {
    pub resolutions: Vec<ObjectResolution>,
}

/// The bipartite cognitive memory graph. Single mutator; readers take
/// clones as immutable snapshots.
#[derive(Clone, Debug, Default)]
pub struct CognitiveMemoryGraph {
    anchors: BTreeMap<AnchorId, VisualAnchor>,
    objects: BTreeMap<ObjectId, ObjectNode>,
    edges: BTreeSet<(AnchorId, ObjectId)>,
    version: u64,
    next_object: u64,
}

impl CognitiveMemoryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn anchor_count(&self) -> usize {
        self.anchors.len()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn anchors(&self) -> impl Iterator<Item = &VisualAnchor> {
        self.anchors.values()
    }

    pub fn objects(&self) -> impl Iterator<Item = &ObjectNode> {
        self.objects.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = (AnchorId, ObjectId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn anchor(&self, id: AnchorId) -> Option<&VisualAnchor> {
        self.anchors.get(&id)
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectNode> {
        self.objects.get(&id)
    }

    /// Labels currently present in the graph.
    pub fn label_set(&self) -> BTreeSet<String> {
        self.objects.values().map(|o| o.label.clone()).collect()
    }

    /// Anchors observing a given object.
    pub fn observers_of(&self, object: ObjectId) -> Vec<AnchorId> {
        self.edges
            .iter()
            .filter(|(_, o)| *o == object)
            .map(|(a, _)| *a)
            .collect()
    }

    /// Objects observed by a given anchor.
    pub fn observed_by(&self, anchor: AnchorId) -> Vec<ObjectId> {
        self.edges
            .range((anchor, ObjectId(0))..=(anchor, ObjectId(u64::MAX)))
            .map(|(_, o)| *o)
            .collect()
    }

    /// Insert an anchor and its detections, merging each incoming object
    /// into the most similar existing node when similarity strictly exceeds
    /// the threshold. Bumps the version by exactly 1.
    pub fn insert_anchor(
        &mut self,
        anchor: VisualAnchor,
        objects: Vec<ObservedObject>,
        cfg: &MergeConfig,
    ) -> Result<MergeReport, MemoryError> {
        if self.anchors.contains_key(&anchor.id) {
            return Err(MemoryError::DuplicateAnchor(anchor.id));
        }
        let anchor_id = anchor.id;
        self.anchors.insert(anchor_id, anchor);

        let mut report = MergeReport::default();
        for incoming in objects {
            let mut embedding = incoming.embedding;
            normalize(&mut embedding);
            let candidate = ObjectNode {
                id: ObjectId(u64::MAX), // placeholder until resolved
                label: incoming.label,
                extent: Aabb::from_points(&incoming.points)
                    .unwrap_or(Aabb { min: [0.0; 3], max: [0.0; 3] }),
                centroid: points_centroid(&incoming.points),
                points: incoming.points,
                embedding,
                observation_count: 1,
            };

            // argmax over existing nodes; ties keep the lowest id because
            // iteration is in id order and improvement is strict
            let mut best: Option<(f64, ObjectId)> = None;
            for (id, node) in &self.objects {
                let s = object_similarity(&candidate, node, cfg);
                if best.map_or(true, |(bs, _)| s > bs) {
                    best = Some((s, *id));
                }
            }

            let resolved = match best {
                Some((s, id)) if s > cfg.merge_threshold => {
                    let node = self.objects.get_mut(&id).expect("resolved node exists");
                    node.points.extend_from_slice(&candidate.points);
                    node.extent = Aabb::from_points(&node.points).expect("points non-empty");
                    node.centroid = points_centroid(&node.points);
                    let count = node.observation_count as f64;
                    for (e, n) in node.embedding.iter_mut().zip(&candidate.embedding) {
                        *e = *e * count + *n;
                    }
                    normalize(&mut node.embedding);
                    node.observation_count += 1;
                    report.resolutions.push(ObjectResolution {
                        object_id: id,
                        merged: true,
                    });
                    id
                }
                _ => {
                    let id = ObjectId(self.next_object);
                    self.next_object += 1;
                    let mut node = candidate;
                    node.id = id;
                    self.objects.insert(id, node);
                    report.resolutions.push(ObjectResolution {
                        object_id: id,
                        merged: false,
                    });
                    id
                }
            };
            self.edges.insert((anchor_id, resolved));
        }
        self.version += 1;
        Ok(report)
    }

    /// Induced bipartite subgraph: the given anchors, every object they
    /// observe, and all edges between them. The version is inherited from
    /// the source snapshot.
    pub fn subgraph_of(&self, anchor_ids: &[AnchorId]) -> Result<CognitiveMemoryGraph, MemoryError> {
        let mut sub = CognitiveMemoryGraph {
            version: self.version,
            next_object: self.next_object,
            ..Default::default()
        };
        for &a in anchor_ids {
            let anchor = self.anchors.get(&a).ok_or(MemoryError::UnknownAnchor(a))?;
            sub.anchors.insert(a, anchor.clone());
        }
        for &(a, o) in &self.edges {
            if sub.anchors.contains_key(&a) {
                sub.edges.insert((a, o));
                if !sub.objects.contains_key(&o) {
                    sub.objects.insert(o, self.objects[&o].clone());
                }
            }
        }
        Ok(sub)
    }

    /// Remove the given anchors and their edges. Objects are never removed.
    /// Bumps the version by 1 (also when the set is empty, since callers
    /// treat compaction as a mutation).
    pub fn remove_anchors(&mut self, ids: &[AnchorId]) {
        for id in ids {
            self.anchors.remove(id);
        }
        self.edges.retain(|(a, _)| self.anchors.contains_key(a));
        self.version += 1;
    }

    /// Structural audit used by tests: edge endpoints exist, embeddings are
    /// unit norm, centroids lie inside extents.
    pub fn audit(&self) -> Result<(), String> {
        for &(a, o) in &self.edges {
            if !self.anchors.contains_key(&a) {
                return Err(format!("dangling edge: anchor {:?}", a));
            }
            if !self.objects.contains_key(&o) {
                return Err(format!("dangling edge: object {:?}", o));
            }
        }
        for node in self.objects.values() {
            let n = node.embedding.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (n - 1.0).abs() > 1e-9 {
                return Err(format!("object {:?} embedding norm {}", node.id, n));
            }
            if node.points.is_empty() {
                return Err(format!("object {:?} has no points", node.id));
            }
            if !node
                .extent
                .contains([node.centroid.x, node.centroid.y, node.extent.center()[2]])
            {
                return Err(format!("object {:?} centroid outside extent", node.id));
            }
        }
        Ok(())
    }
}

fn points_centroid(points: &[[f64; 3]]) -> Vec2 {
    if points.is_empty() {
        return Vec2::ZERO;
    }
    let mut c = Vec2::ZERO;
    for p in points {
        c += Vec2::new(p[0], p[1]);
    }
    c / points.len() as f64
}
