//! `dump-graph`: validate and re-emit an existing export, or explore a
//! scene for a fixed number of steps and dump the resulting memory graph.

use std::path::Path;
use std::sync::Arc;

use semnav_core::geom::Vec2;
use semnav_core::memory::{load_graph, save_graph};
use semnav_core::oracle::MockOracle;
use semnav_core::sim::{run_episode_capture, EpisodeSpec, Policy, RunConfig};
use semnav_core::world::Scene;

use crate::CliError;

pub fn execute(
    graph: Option<&Path>,
    scene: Option<&Path>,
    instruction: Option<&str>,
    steps: u64,
    seed: u64,
    start: Option<&str>,
    out: &Path,
) -> Result<(), CliError> {
    let graph = match (graph, scene) {
        (Some(path), None) => {
            let file = std::fs::File::open(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            load_graph(std::io::BufReader::new(file))
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        (None, Some(scene_path)) => {
            let scene = Scene::load(scene_path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", scene_path.display())))?;
            let start = parse_start(start, &scene)?;
            let spec = EpisodeSpec {
                id: "dump-graph".into(),
                scene: String::new(),
                start: [start.x, start.y],
                start_heading: 0.0,
                instruction: instruction.unwrap_or("find the bed").to_string(),
                // an unreachable pseudo-target keeps the run in pure
                // exploration; discovery would only end it early
                targets: vec!["__none__".into()],
                success_radius: 0.5,
                max_steps: steps.max(1),
            };
            let cfg = RunConfig::default();
            let oracle = Arc::new(MockOracle::with_defaults());
            let (_, graph) = run_episode_capture(&scene, &spec, &cfg, oracle, Policy::Full, seed)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            graph
        }
        _ => {
            return Err(CliError::Usage(
                "pass exactly one of --graph or --scene".into(),
            ))
        }
    };

    let file = std::fs::File::create(out)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    save_graph(&graph, std::io::BufWriter::new(file))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    println!(
        "{}: {} anchors, {} objects, {} edges",
        out.display(),
        graph.anchor_count(),
        graph.object_count(),
        graph.edge_count()
    );
    Ok(())
}

fn parse_start(start: Option<&str>, scene: &Scene) -> Result<Vec2, CliError> {
    match start {
        None => Ok(Vec2::new(
            scene.width as f64 * scene.resolution / 2.0,
            scene.height as f64 * scene.resolution / 2.0,
        )),
        Some(text) => {
            let parts: Vec<&str> = text.split(',').collect();
            if parts.len() < 2 {
                return Err(CliError::Usage(format!("bad --start {text:?}")));
            }
            let x: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad --start {text:?}")))?;
            let y: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad --start {text:?}")))?;
            Ok(Vec2::new(x, y))
        }
    }
}
