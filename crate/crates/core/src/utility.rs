//! Context-aware frontier utility: a superposed Gaussian field over the
//! graph's objects (structural-semantic term) combined with the
//! out-of-boundary visual evidence of the frontier's associated anchor.

use serde::{Deserialize, Serialize};

use crate::geom::Vec2;
use crate::memory::{CognitiveMemoryGraph, ObjectId};
use crate::oracle::{Instruction, InstructionDecomposition, SemanticOracle, Subject};
use crate::world::Frontier;

/// One object's contribution to the semantic field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSource {
    pub object_id: ObjectId,
    pub label: String,
    pub center: Vec2,
    /// Instruction similarity of the object's label.
    pub peak: f64,
    /// Standard deviation from the mean horizontal half-extent, clamped.
    pub sigma: f64,
    /// `gamma * peak` when the label is task-related, else `peak`.
    pub boosted_peak: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UtilityConfig {
    pub lambda_struct: f64,
    pub lambda_vis: f64,
    /// Boost applied to task-related labels; must exceed 1.
    pub gamma: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Keep the duplicated peak factor of the literal structural-score
    /// composition instead of the single-weight reading.
    pub double_weight: bool,
    /// Cell size for rasterized field exports, meters.
    pub heatmap_resolution: f64,
}

impl Default for UtilityConfig {
    fn default() -> Self {
        UtilityConfig {
            lambda_struct: 0.5,
            lambda_vis: 0.5,
            gamma: 2.0,
            sigma_min: 0.25,
            sigma_max: 3.0,
            double_weight: false,
            heatmap_resolution: 0.1,
        }
    }
}

impl UtilityConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.lambda_struct < 0.0 || self.lambda_vis < 0.0 {
            return Err("utility weights must be >= 0".into());
        }
        if self.gamma <= 1.0 {
            return Err("gamma must be > 1".into());
        }
        if self.sigma_min <= 0.0 || self.sigma_max < self.sigma_min {
            return Err("sigma clamp must satisfy 0 < sigma_min <= sigma_max".into());
        }
        if self.heatmap_resolution <= 0.0 {
            return Err("heatmap_resolution must be > 0".into());
        }
        Ok(())
    }
}

/// One source per object node: peak from the oracle, sigma from the mean
/// horizontal half-extent, boost for task-related labels.
pub fn build_sources(
    graph: &CognitiveMemoryGraph,
    instruction: &Instruction,
    decomposition: &InstructionDecomposition,
    oracle: &dyn SemanticOracle,
    cfg: &UtilityConfig,
) -> Vec<FieldSource> {
    graph
        .objects()
        .map(|obj| {
            let peak = oracle.similarity(Subject::Label(&obj.label), instruction);
            let he = obj.extent.half_extents();
            let sigma = (0.5 * (he[0] + he[1])).clamp(cfg.sigma_min, cfg.sigma_max);
            let boosted_peak = if decomposition.related.contains(&obj.label) {
                cfg.gamma * peak
            } else {
                peak
            };
            FieldSource {
                object_id: obj.id,
                label: obj.label.clone(),
                center: obj.centroid,
                peak,
                sigma,
                boosted_peak,
            }
        })
        .collect()
}

/// Superposed field value at a point.
pub fn field_value(sources: &[FieldSource], p: Vec2) -> f64 {
    sources
        .iter()
        .map(|s| s.boosted_peak * kernel(s, p))
        .sum()
}

fn kernel(s: &FieldSource, p: Vec2) -> f64 {
    let d2 = (p - s.center).norm_sq();
    (-d2 / (2.0 * s.sigma * s.sigma)).exp()
}

/// Structural-semantic score: the field evaluated at the frontier centroid.
/// With `double_weight` the unboosted peak multiplies in a second time,
/// reproducing the literal composition of the boosted sum over peak-bearing
/// kernels.
pub fn score_structural(frontier: &Frontier, sources: &[FieldSource], cfg: &UtilityConfig) -> f64 {
    sources
        .iter()
        .map(|s| {
            let base = s.boosted_peak * kernel(s, frontier.centroid);
            if cfg.double_weight {
                base * s.peak
            } else {
                base
            }
        })
        .sum()
}

/// Out-of-boundary evidence: similarity of the associated anchor's view to
/// the instruction; 0 when no anchor is associated or it has since been
/// compacted away.
pub fn score_visual(
    frontier: &Frontier,
    graph: &CognitiveMemoryGraph,
    oracle: &dyn SemanticOracle,
    instruction: &Instruction,
) -> f64 {
    frontier
        .anchor_id
        .and_then(|id| graph.anchor(id))
        .map(|a| oracle.similarity(Subject::AnchorView(&a.view), instruction))
        .unwrap_or(0.0)
}

/// Unified frontier score.
pub fn score_frontier(
    frontier: &Frontier,
    sources: &[FieldSource],
    graph: &CognitiveMemoryGraph,
    oracle: &dyn SemanticOracle,
    instruction: &Instruction,
    cfg: &UtilityConfig,
) -> f64 {
    let s_struct = score_structural(frontier, sources, cfg);
    let s_vis = if cfg.lambda_vis != 0.0 {
        score_visual(frontier, graph, oracle, instruction)
    } else {
        0.0 // ablated: the anchor similarity is never requested
    };
    cfg.lambda_struct * s_struct + cfg.lambda_vis * s_vis
}

/// Score every frontier; parallel over frontiers when the `parallel`
/// feature is enabled.
#[cfg(feature = "parallel")]
pub fn score_all(
    frontiers: &[Frontier],
    sources: &[FieldSource],
    graph: &CognitiveMemoryGraph,
    oracle: &(dyn SemanticOracle + Sync),
    instruction: &Instruction,
    cfg: &UtilityConfig,
) -> Vec<f64> {
    use rayon::prelude::*;
    frontiers
        .par_iter()
        .map(|f| score_frontier(f, sources, graph, oracle, instruction, cfg))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn score_all(
    frontiers: &[Frontier],
    sources: &[FieldSource],
    graph: &CognitiveMemoryGraph,
    oracle: &(dyn SemanticOracle + Sync),
    instruction: &Instruction,
    cfg: &UtilityConfig,
) -> Vec<f64> {
    score_all_seq(frontiers, sources, graph, oracle, instruction, cfg)
}

/// Sequential scoring, available regardless of features for comparison.
pub fn score_all_seq(
    frontiers: &[Frontier],
    sources: &[FieldSource],
    graph: &CognitiveMemoryGraph,
    oracle: &(dyn SemanticOracle + Sync),
    instruction: &Instruction,
    cfg: &UtilityConfig,
) -> Vec<f64> {
    frontiers
        .iter()
        .map(|f| score_frontier(f, sources, graph, oracle, instruction, cfg))
        .collect()
}

/// Rasterize the field over a w x h cell grid (row-major, row 0 at y = 0).
/// Parallel over rows when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn rasterize_field(sources: &[FieldSource], width: usize, height: usize, res: f64) -> Vec<f64> {
    use rayon::prelude::*;
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let p = Vec2::new((x as f64 + 0.5) * res, (y as f64 + 0.5) * res);
            *v = field_value(sources, p);
        }
    });
    out
}

#[cfg(not(feature = "parallel"))]
pub fn rasterize_field(sources: &[FieldSource], width: usize, height: usize, res: f64) -> Vec<f64> {
    rasterize_field_seq(sources, width, height, res)
}

pub fn rasterize_field_seq(
    sources: &[FieldSource],
    width: usize,
    height: usize,
    res: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let p = Vec2::new((x as f64 + 0.5) * res, (y as f64 + 0.5) * res);
            out[y * width + x] = field_value(sources, p);
        }
    }
    out
}
