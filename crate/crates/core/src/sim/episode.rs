//! One episode: the perception/planning loop driving observation
//! integration, memory growth, reasoning, goal arbitration, and motion
//! until success, false positive, frontier exhaustion, or the step limit.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{Pose, Vec2};
use crate::memory::{
    AnchorId, CognitiveMemoryGraph, ObservedObject, SymbolicView, ViewedObject, VisualAnchor,
};
use crate::oracle::{Instruction, OracleError, SemanticOracle};
use crate::planner::{plan_path, PathFollower, PlanError, StepStatus};
use crate::reasoning::{
    decompose_graph, spawn_worker, ReasoningHandle, TargetFound, WorkerCore, WorkerEvent,
    WorkerOutput,
};
use crate::utility::{build_sources, score_all, score_all_seq};
use crate::world::{extract_frontiers, visible_objects, Cell, OccupancyGrid, Scene};
use crate::wtrp::select_goal;

use super::metrics::{EpisodeResult, Outcome};
use super::trace::{TraceEvent, TraceLog};
use super::{Policy, RunConfig, SimError};

/// A scripted episode: where to start, what to ask, and what counts as
/// success.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSpec {
    pub id: String,
    /// Scene path, resolved relative to the suite file by the loader.
    pub scene: String,
    pub start: [f64; 2],
    #[serde(default)]
    pub start_heading: f64,
    pub instruction: String,
    /// Ground-truth labels that count as the target.
    pub targets: Vec<String>,
    #[serde(default = "default_success_radius")]
    pub success_radius: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

fn default_success_radius() -> f64 {
    1.0
}

fn default_max_steps() -> u64 {
    200
}

impl EpisodeSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.max_steps == 0 {
            return Err(SimError::Config("max_steps must be positive".into()));
        }
        if self.success_radius <= 0.0 {
            return Err(SimError::Config("success_radius must be positive".into()));
        }
        if self.instruction.trim().is_empty() {
            return Err(SimError::Config("instruction must be non-empty".into()));
        }
        Ok(())
    }
}

enum ReasoningDriver {
    /// Deterministic: stepped inline, a bounded number of tasks per tick.
    Inline(Box<WorkerCore>),
    /// One worker thread per episode; used when wall-clock decoupling
    /// matters more than replayability.
    Threaded(ReasoningHandle),
}

/// Dijkstra over the ground truth from the start cell; returns the
/// shortest distance into the success region (cells within the success
/// radius of any target object), or None when no region cell is reachable.
pub fn shortest_to_targets(
    truth: &OccupancyGrid,
    start: Vec2,
    targets: &[&crate::world::SceneObject],
    success_radius: f64,
) -> Option<f64> {
    let w = truth.width();
    let h = truth.height();
    let at = |c: crate::world::CellIdx| c.y as usize * w + c.x as usize;
    let sc = truth.cell_of(start);
    if !truth.in_bounds(sc) || truth.get(sc) == Cell::Occupied {
        return None;
    }
    let mut dist = vec![f64::INFINITY; w * h];
    dist[at(sc)] = 0.0;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push((std::cmp::Reverse(ordered(0.0)), sc));
    while let Some((std::cmp::Reverse(d), cur)) = heap.pop() {
        let d = d.0;
        if d > dist[at(cur)] + 1e-12 {
            continue;
        }
        for dy in -1i32..=1 {
            for dx in -1i32..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let n = crate::world::CellIdx::new(cur.x + dx, cur.y + dy);
                if !truth.in_bounds(n) || truth.get(n) == Cell::Occupied {
                    continue;
                }
                if dx != 0 && dy != 0 {
                    let a = crate::world::CellIdx::new(cur.x + dx, cur.y);
                    let b = crate::world::CellIdx::new(cur.x, cur.y + dy);
                    if truth.get(a) == Cell::Occupied || truth.get(b) == Cell::Occupied {
                        continue;
                    }
                }
                let step = if dx != 0 && dy != 0 {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                } * truth.resolution();
                if d + step < dist[at(n)] - 1e-12 {
                    dist[at(n)] = d + step;
                    heap.push((std::cmp::Reverse(ordered(d + step)), n));
                }
            }
        }
    }

    let mut best = f64::INFINITY;
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let c = crate::world::CellIdx::new(x, y);
            let p = truth.center_of(c);
            if targets.iter().any(|t| t.center().dist(p) <= success_radius) && dist[at(c)].is_finite()
            {
                best = best.min(dist[at(c)]);
            }
        }
    }
    best.is_finite().then_some(best)
}

/// The mid-term exploration goal stays committed while the follower is
/// live; it clears on arrival, blockage, unreachability, or a discovery.
fn committed_goal(exploring: bool, current: Option<Vec2>, follower_live: bool) -> Option<Vec2> {
    if exploring && follower_live {
        current
    } else {
        None
    }
}

#[derive(PartialEq, PartialOrd)]
struct Ordered(f64);
impl Eq for Ordered {}
#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
fn ordered(v: f64) -> Ordered {
    Ordered(v)
}

/// Run one episode to completion.
pub fn run_episode(
    scene: &Scene,
    spec: &EpisodeSpec,
    cfg: &RunConfig,
    oracle: Arc<dyn SemanticOracle>,
    policy: Policy,
    seed: u64,
) -> Result<EpisodeResult, SimError> {
    run_episode_capture(scene, spec, cfg, oracle, policy, seed).map(|(r, _)| r)
}

/// Like `run_episode`, additionally returning the final memory graph.
pub fn run_episode_capture(
    scene: &Scene,
    spec: &EpisodeSpec,
    cfg: &RunConfig,
    oracle: Arc<dyn SemanticOracle>,
    policy: Policy,
    seed: u64,
) -> Result<(EpisodeResult, CognitiveMemoryGraph), SimError> {
    scene.validate().map_err(|e| SimError::Config(e.to_string()))?;
    spec.validate()?;

    let truth = scene.ground_truth();
    let start = Pose::new(Vec2::new(spec.start[0], spec.start[1]), spec.start_heading);
    if !truth.in_bounds_point(start.position)
        || truth.get(truth.cell_of(start.position)) == Cell::Occupied
    {
        return Err(SimError::Config("start pose is not collision-free".into()));
    }

    let instruction = Instruction::new(&spec.instruction, &spec.id);
    let decomposition = match oracle.decompose(&instruction) {
        Ok(d) => d,
        Err(OracleError::NoTarget) => return Err(SimError::NoTarget(spec.instruction.clone())),
        Err(e) => return Err(SimError::Oracle(e.to_string())),
    };

    let target_objects: Vec<&crate::world::SceneObject> = scene
        .objects
        .iter()
        .filter(|o| spec.targets.contains(&o.label))
        .collect();
    let shortest_length =
        shortest_to_targets(&truth, start.position, &target_objects, spec.success_radius)
            .unwrap_or(0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = OccupancyGrid::new(scene.width, scene.height, scene.resolution);
    let mut graph = CognitiveMemoryGraph::new();
    let mut driver = if cfg.sim.async_reasoning {
        ReasoningDriver::Threaded(spawn_worker(
            oracle.clone(),
            instruction.clone(),
            cfg.sim.worker.clone(),
        ))
    } else {
        ReasoningDriver::Inline(Box::new(WorkerCore::new(
            instruction.clone(),
            cfg.sim.worker.clone(),
        )))
    };

    let mut trace = TraceLog::default();
    trace.push(TraceEvent::EpisodeStart {
        episode: spec.id.clone(),
        instruction: spec.instruction.clone(),
        seed,
        policy: policy.as_str().to_string(),
    });

    let mut agent = start;
    let mut last_anchor_pose: Option<Pose> = None;
    let mut anchor_seq: u64 = 0;
    let mut actual_length = 0.0;
    let mut found: Option<TargetFound> = None;
    let mut follower: Option<PathFollower> = None;
    let mut current_goal: Option<Vec2> = None;
    let mut outcome: Option<Outcome> = None;
    let mut steps: u64 = 0;
    let loop_started = std::time::Instant::now();
    // Viewpoint cells already stood on (or proven unreachable): frontiers
    // that persist there are unobservable, e.g. shadowed wall corners, and
    // drop out of goal selection.
    let mut spent_viewpoints: std::collections::HashSet<crate::world::CellIdx> =
        Default::default();
    // Discoveries whose goal could not be delivered; ignored on re-emission.
    let mut abandoned_targets: std::collections::HashSet<u64> = Default::default();
    let mut exploring_goal = false;

    // utility config per policy ablation
    let mut ucfg = cfg.utility.clone();
    match policy {
        Policy::NoStruct => ucfg.lambda_struct = 0.0,
        Policy::NoVis => ucfg.lambda_vis = 0.0,
        _ => {}
    }

    for step in 0..spec.max_steps {
        steps = step + 1;

        // perceive
        let detections = visible_objects(scene, &truth, &agent, &cfg.sim.sensor);
        let labels: Vec<String> = detections.iter().map(|d| d.label.clone()).collect();
        let known = graph.label_set();
        let select =
            crate::memory::should_select_anchor(&agent, last_anchor_pose.as_ref(), &labels, &known, &cfg.merge);
        let observer = if select {
            anchor_seq += 1;
            Some(AnchorId(anchor_seq))
        } else {
            None
        };
        grid.integrate_observation(&truth, &agent, &cfg.sim.sensor, observer, step)
            .map_err(|e| SimError::Config(e.to_string()))?;

        // memory growth
        if let Some(anchor_id) = observer {
            let observed: Vec<ObservedObject> = detections
                .iter()
                .map(|d| {
                    let obj = &scene.objects[d.object_index];
                    ObservedObject::from_points(
                        &obj.label,
                        obj.sample_points(&mut rng, cfg.sim.points_per_object),
                    )
                })
                .collect();
            let view = SymbolicView {
                objects: detections
                    .iter()
                    .map(|d| ViewedObject {
                        label: d.label.clone(),
                        bearing: d.bearing,
                    })
                    .collect(),
            };
            let n_objects = observed.len();
            graph
                .insert_anchor(
                    VisualAnchor {
                        id: anchor_id,
                        pose: agent,
                        view,
                        timestamp: step,
                        cost: 1.0,
                    },
                    observed,
                    &cfg.merge,
                )
                .map_err(|e| SimError::Config(e.to_string()))?;
            last_anchor_pose = Some(agent);
            trace.push(TraceEvent::AnchorSelected {
                step,
                anchor: anchor_id.0,
                objects: n_objects,
            });

            if graph.anchor_count() > cfg.sim.anchor_budget {
                let report = crate::cover::compact(
                    &mut graph,
                    cfg.sim.coverage_r,
                    cfg.sim.cover_exact_limit,
                );
                trace.push(TraceEvent::Compaction {
                    step,
                    removed: report.removed.len(),
                    kept: report.kept.len(),
                    optimal: report.optimal,
                });
            }

            // re-decompose on every memory change
            if found.is_none() {
                let tasks = decompose_graph(&graph, &decomposition, oracle.as_ref(), &instruction);
                match &mut driver {
                    ReasoningDriver::Inline(core) => core.submit(tasks, graph.version()),
                    ReasoningDriver::Threaded(handle) => {
                        let _ = handle.submit(tasks, graph.version());
                    }
                }
            }
        }

        // reasoning progress
        if found.is_none() {
            let mut events = Vec::new();
            match &mut driver {
                ReasoningDriver::Inline(core) => {
                    for _ in 0..cfg.sim.tasks_per_tick {
                        if let Some(e) = core.step(oracle.as_ref()) {
                            events.push(e);
                        }
                        if !core.has_pending() {
                            break;
                        }
                    }
                    for r in core.take_records() {
                        trace.push(TraceEvent::OracleCall {
                            step,
                            kind: r.kind,
                            priority: r.priority,
                            visible: r.visible,
                            failed: r.failed,
                            latency_us: cfg.sim.trace_timing.then_some(r.latency_us),
                        });
                    }
                }
                ReasoningDriver::Threaded(handle) => {
                    for out in handle.poll() {
                        match out {
                            WorkerOutput::Event(e) => events.push(e),
                            WorkerOutput::Record(r) => trace.push(TraceEvent::OracleCall {
                                step,
                                kind: r.kind,
                                priority: r.priority,
                                visible: r.visible,
                                failed: r.failed,
                                latency_us: cfg.sim.trace_timing.then_some(r.latency_us),
                            }),
                        }
                    }
                }
            }
            for e in events {
                if let WorkerEvent::Found(f) = e {
                    if abandoned_targets.contains(&f.content_hash) {
                        continue;
                    }
                    trace.push(TraceEvent::TargetFound {
                        step,
                        anchor: f.anchor_id.0,
                        x: f.centroid.x,
                        y: f.centroid.y,
                    });
                    found = Some(f);
                    follower = None;
                    current_goal = None;
                }
            }
        }

        // goal arbitration; the stop fires well inside the success radius
        // so the centroid estimate's error cannot push the stop outside it
        let stop_radius = 0.6 * spec.success_radius;
        let goal = if let Some(f) = &found {
            if agent.position.dist(f.centroid) <= stop_radius {
                // stop action: success iff a ground-truth target is near
                let success = target_objects
                    .iter()
                    .any(|t| t.center().dist(agent.position) <= spec.success_radius);
                outcome = Some(if success {
                    Outcome::Success
                } else {
                    Outcome::FalsePositive
                });
                break;
            }
            trace.push(TraceEvent::GoalSelected {
                step,
                mode: "target".into(),
                frontier: None,
                n_frontiers: 0,
                x: f.centroid.x,
                y: f.centroid.y,
                score: None,
                objective: None,
            });
            exploring_goal = false;
            f.centroid
        } else if let Some(goal) = committed_goal(exploring_goal, current_goal, follower.is_some())
        {
            // the mid-term goal holds while its surroundings stay unknown;
            // re-deciding every tick would thrash between frontiers
            goal
        } else {
            let mut frontiers = extract_frontiers(&grid, cfg.sim.robot_radius, cfg.motion.h_max);
            frontiers.retain(|f| !spent_viewpoints.contains(&grid.cell_of(f.viewpoint.position)));
            if frontiers.is_empty() {
                outcome = Some(Outcome::NoFrontier);
                break;
            }
            let sources = build_sources(&graph, &instruction, &decomposition, oracle.as_ref(), &ucfg);
            let scores = if cfg.sim.parallel_scoring {
                score_all(&frontiers, &sources, &graph, oracle.as_ref(), &instruction, &ucfg)
            } else {
                score_all_seq(&frontiers, &sources, &graph, oracle.as_ref(), &instruction, &ucfg)
            };
            let (idx, objective) = match policy {
                Policy::GreedyGoal => {
                    // argmax score, ties toward the earlier frontier
                    let mut best = 0;
                    for (i, s) in scores.iter().enumerate() {
                        if *s > scores[best] + 1e-12 {
                            best = i;
                        }
                    }
                    (best, None)
                }
                _ => {
                    let sel = select_goal(
                        &agent,
                        &frontiers,
                        &scores,
                        &cfg.motion,
                        cfg.sim.wtrp_exact_limit,
                    )
                    .map_err(|e| SimError::Config(e.to_string()))?;
                    (sel.frontier_index, Some(sel.tour.objective))
                }
            };
            trace.push(TraceEvent::GoalSelected {
                step,
                mode: "explore".into(),
                frontier: Some(idx),
                n_frontiers: frontiers.len(),
                x: frontiers[idx].viewpoint.position.x,
                y: frontiers[idx].viewpoint.position.y,
                score: Some(scores[idx]),
                objective,
            });
            exploring_goal = true;
            frontiers[idx].viewpoint.position
        };

        // plan when the goal moved or the path was invalidated
        let need_replan = match (&follower, current_goal) {
            (None, _) => true,
            (_, None) => true,
            (_, Some(g)) => g.dist(goal) > cfg.planner.capture_radius,
        };
        if need_replan {
            match plan_path(&grid, agent.position, goal, &cfg.planner) {
                Ok(path) => {
                    follower = Some(PathFollower::new(path));
                    current_goal = Some(goal);
                }
                Err(PlanError::Unreachable | PlanError::GoalNotFree) => {
                    trace.push(TraceEvent::Replan {
                        step,
                        reason: "goal unreachable".into(),
                    });
                    if exploring_goal {
                        // this frontier is not deliverable; drop it from
                        // future selection rounds
                        spent_viewpoints.insert(grid.cell_of(goal));
                    } else if let Some(f) = found.take() {
                        abandoned_targets.insert(f.content_hash);
                    }
                    follower = None;
                    current_goal = None;
                    trace.push(TraceEvent::Tick {
                        step,
                        x: agent.position.x,
                        y: agent.position.y,
                        heading: agent.heading,
                    });
                    continue;
                }
                Err(e) => return Err(SimError::Plan(e.to_string())),
            }
        }

        // move
        if let Some(fol) = &mut follower {
            let r = fol.step(&agent, &grid, &cfg.motion, &cfg.planner, cfg.sim.dt);
            actual_length += agent.position.dist(r.pose.position);
            agent = r.pose;
            match r.status {
                StepStatus::Blocked => {
                    trace.push(TraceEvent::Replan {
                        step,
                        reason: "path blocked".into(),
                    });
                    follower = None;
                    current_goal = None;
                }
                StepStatus::Arrived => {
                    if exploring_goal {
                        // standing on the viewpoint: whatever stays unknown
                        // from here is unobservable, stop re-selecting it
                        spent_viewpoints.insert(grid.cell_of(goal));
                    } else if let Some(f) = &found {
                        if agent.position.dist(f.centroid) > stop_radius {
                            // the discovery's goal point cannot be reached
                            // closely enough to issue a stop
                            abandoned_targets.insert(f.content_hash);
                            found = None;
                        }
                    }
                    follower = None;
                    current_goal = None;
                }
                StepStatus::Moving => {}
            }
        }
        trace.push(TraceEvent::Tick {
            step,
            x: agent.position.x,
            y: agent.position.y,
            heading: agent.heading,
        });
    }

    let loop_seconds = loop_started.elapsed().as_secs_f64();
    if let ReasoningDriver::Threaded(handle) = driver {
        handle.shutdown();
    }

    let outcome = outcome.unwrap_or(Outcome::Stepout);
    let success = outcome == Outcome::Success;
    trace.push(TraceEvent::EpisodeEnd {
        step: steps,
        outcome: outcome.as_str().to_string(),
        success,
        actual_length,
        shortest_length,
    });

    Ok((
        EpisodeResult {
            success,
            outcome,
            actual_length,
            shortest_length,
            steps,
            loop_seconds,
            trace,
        },
        graph,
    ))
}
