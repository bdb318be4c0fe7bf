//! Suite files and batch running: a list of episodes over scene files,
//! executed under one policy and seed, producing metrics plus per-episode
//! results. Episodes run in parallel when the `parallel` feature is on;
//! per-episode seeds derive from the suite seed and index either way.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geom::stable_hash_u64;
use crate::oracle::SemanticOracle;
use crate::world::Scene;

use super::episode::{run_episode, EpisodeSpec};
use super::metrics::{compute_metrics, EpisodeResult, Metrics};
use super::{Policy, RunConfig, SimError};

pub const SUITE_FORMAT: &str = "suite";
pub const SUITE_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub episodes: Vec<EpisodeSpec>,
}

/// Load a suite and its scenes; scene paths resolve relative to the suite
/// file's directory.
pub fn load_suite(path: &Path) -> Result<Vec<(Scene, EpisodeSpec)>, SimError> {
    let text = std::fs::read_to_string(path)?;
    let file: SuiteFile = serde_json::from_str(&text)?;
    if file.format != SUITE_FORMAT || file.version != SUITE_VERSION {
        return Err(SimError::Config(format!(
            "unsupported suite header {}/{}",
            file.format, file.version
        )));
    }
    if file.episodes.is_empty() {
        return Err(SimError::Config("suite has no episodes".into()));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cache: std::collections::BTreeMap<String, Scene> = Default::default();
    let mut out = Vec::with_capacity(file.episodes.len());
    for spec in file.episodes {
        let scene = match cache.get(&spec.scene) {
            Some(s) => s.clone(),
            None => {
                let scene = Scene::load(&base.join(&spec.scene))
                    .map_err(|e| SimError::Config(format!("scene {:?}: {e}", spec.scene)))?;
                cache.insert(spec.scene.clone(), scene.clone());
                scene
            }
        };
        out.push((scene, spec));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub metrics: Metrics,
    pub results: Vec<EpisodeResult>,
}

/// Seed for episode `index` under the suite seed.
pub fn episode_seed(suite_seed: u64, index: usize) -> u64 {
    stable_hash_u64(suite_seed ^ 0x5eed_5eed_5eed_5eed, index as u64)
}

/// Run every episode under one policy. Deterministic for a fixed seed and
/// the mock oracle regardless of the parallel feature, because episodes
/// are independent and collected in order.
pub fn run_suite(
    episodes: &[(Scene, EpisodeSpec)],
    cfg: &RunConfig,
    oracle: Arc<dyn SemanticOracle>,
    policy: Policy,
    seed: u64,
) -> Result<SuiteResult, SimError> {
    if episodes.is_empty() {
        return Err(SimError::Config("no episodes to run".into()));
    }

    #[cfg(feature = "parallel")]
    let results: Result<Vec<EpisodeResult>, SimError> = {
        use rayon::prelude::*;
        episodes
            .par_iter()
            .enumerate()
            .map(|(i, (scene, spec))| {
                run_episode(scene, spec, cfg, oracle.clone(), policy, episode_seed(seed, i))
            })
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Result<Vec<EpisodeResult>, SimError> = episodes
        .iter()
        .enumerate()
        .map(|(i, (scene, spec))| {
            run_episode(scene, spec, cfg, oracle.clone(), policy, episode_seed(seed, i))
        })
        .collect();

    let results = results?;
    Ok(SuiteResult {
        metrics: compute_metrics(&results),
        results,
    })
}

/// One-sided sign test: probability of at least `wins` successes in
/// `wins + losses` fair coin flips. Ties are excluded by the caller.
pub fn sign_test_p(wins: u32, losses: u32) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    // exact binomial tail; n stays small in the paired comparisons
    let mut p = 0.0;
    for k in wins..=n {
        p += binomial(n, k);
    }
    p / 2f64.powi(n as i32)
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (i + 1) as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_test_values() {
        // p(X >= 9 | n = 10) = (10 + 1) / 1024
        assert!((sign_test_p(9, 1) - 11.0 / 1024.0).abs() < 1e-12);
        // even split is not significant
        assert!(sign_test_p(5, 5) > 0.5);
        // all wins over 20 trials is decisive
        assert!(sign_test_p(20, 0) < 1e-5);
        assert_eq!(sign_test_p(0, 0), 1.0);
    }

    #[test]
    fn episode_seeds_differ_by_index() {
        let a = episode_seed(7, 0);
        let b = episode_seed(7, 1);
        let c = episode_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, episode_seed(7, 0));
    }
}
