//! Local planner: A* waypoints over Free cells and a rotate-then-move
//! waypoint follower with collision-checked stepping.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{wrap_angle, Pose, Vec2};
use crate::wtrp::MotionConfig;
use crate::world::{supercover, Cell, CellIdx, OccupancyGrid};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    /// When the goal cell is not Free, plan to the nearest Free cell within
    /// this radius, meters.
    pub snap_radius: f64,
    /// Goals nearer than this are pursued directly without A*.
    pub direct_distance: f64,
    /// Waypoint capture radius, meters.
    pub capture_radius: f64,
    /// Heading error above which the follower rotates in place, radians.
    pub align_threshold: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            snap_radius: 1.0,
            direct_distance: 2.0,
            capture_radius: 0.2,
            align_threshold: 0.6,
        }
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("start cell is not free")]
    StartNotFree,
    #[error("no free goal cell within the snap radius")]
    GoalNotFree,
    #[error("goal unreachable from start")]
    Unreachable,
}

/// An 8-connected path over Free cells.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Vec2>,
    pub total_length: f64,
}

const MOVES: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

#[derive(PartialEq)]
struct Node {
    f: f64,
    h: f64,
    idx: usize,
}

impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap through reversal; ties by h then index for determinism
        other
            .f
            .total_cmp(&self.f)
            .then(other.h.total_cmp(&self.h))
            .then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn neighbors(grid: &OccupancyGrid, c: CellIdx) -> impl Iterator<Item = (CellIdx, f64)> + '_ {
    MOVES.into_iter().filter_map(move |(dx, dy)| {
        let n = CellIdx::new(c.x + dx, c.y + dy);
        if grid.get(n) != Cell::Free {
            return None;
        }
        if dx != 0 && dy != 0 {
            // no corner cutting: both orthogonal neighbors must be free
            if grid.get(CellIdx::new(c.x + dx, c.y)) != Cell::Free
                || grid.get(CellIdx::new(c.x, c.y + dy)) != Cell::Free
            {
                return None;
            }
        }
        let cost = if dx != 0 && dy != 0 {
            std::f64::consts::SQRT_2
        } else {
            1.0
        };
        Some((n, cost * grid.resolution()))
    })
}

/// Nearest Free cell to `goal` within the snap radius; the goal cell
/// itself when it is already Free.
fn snap_goal(grid: &OccupancyGrid, goal: Vec2, snap_radius: f64) -> Option<CellIdx> {
    let gc = grid.cell_of(goal);
    if grid.in_bounds(gc) && grid.get(gc) == Cell::Free {
        return Some(gc);
    }
    let r_cells = (snap_radius / grid.resolution()).ceil() as i32;
    let mut best: Option<(f64, CellIdx)> = None;
    for dy in -r_cells..=r_cells {
        for dx in -r_cells..=r_cells {
            let c = CellIdx::new(gc.x + dx, gc.y + dy);
            if !grid.in_bounds(c) || grid.get(c) != Cell::Free {
                continue;
            }
            let d = grid.center_of(c).dist(goal);
            if d > snap_radius + 1e-9 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, bc)) => d < bd - 1e-12 || (d < bd + 1e-12 && c < bc),
            };
            if better {
                best = Some((d, c));
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Shortest 8-connected path over Free cells (diagonal cost sqrt(2)) with
/// a Euclidean heuristic. A non-Free goal snaps to the nearest Free cell
/// within the configured radius.
pub fn plan_path(
    grid: &OccupancyGrid,
    start: Vec2,
    goal: Vec2,
    cfg: &PlannerConfig,
) -> Result<Path, PlanError> {
    let sc = grid.cell_of(start);
    if !grid.in_bounds(sc) || grid.get(sc) != Cell::Free {
        return Err(PlanError::StartNotFree);
    }
    let gc = snap_goal(grid, goal, cfg.snap_radius).ok_or(PlanError::GoalNotFree)?;
    if sc == gc {
        return Ok(Path {
            waypoints: vec![grid.center_of(sc)],
            total_length: 0.0,
        });
    }

    let w = grid.width();
    let at = |c: CellIdx| c.y as usize * w + c.x as usize;
    let goal_center = grid.center_of(gc);
    let mut g_cost = vec![f64::INFINITY; w * grid.height()];
    let mut parent: Vec<Option<CellIdx>> = vec![None; w * grid.height()];
    let mut heap = BinaryHeap::new();
    g_cost[at(sc)] = 0.0;
    heap.push(Node {
        f: grid.center_of(sc).dist(goal_center),
        h: grid.center_of(sc).dist(goal_center),
        idx: at(sc),
    });

    while let Some(node) = heap.pop() {
        let cur = CellIdx::new((node.idx % w) as i32, (node.idx / w) as i32);
        if cur == gc {
            break;
        }
        let g = g_cost[node.idx];
        if node.f - node.h > g + 1e-12 {
            continue; // stale heap entry
        }
        for (n, step) in neighbors(grid, cur) {
            let ng = g + step;
            if ng < g_cost[at(n)] - 1e-12 {
                g_cost[at(n)] = ng;
                parent[at(n)] = Some(cur);
                let h = grid.center_of(n).dist(goal_center);
                heap.push(Node {
                    f: ng + h,
                    h,
                    idx: at(n),
                });
            }
        }
    }

    if !g_cost[at(gc)].is_finite() {
        return Err(PlanError::Unreachable);
    }
    let mut cells = vec![gc];
    while let Some(p) = parent[at(*cells.last().unwrap())] {
        cells.push(p);
    }
    cells.reverse();
    let waypoints: Vec<Vec2> = cells.iter().map(|&c| grid.center_of(c)).collect();
    Ok(Path {
        total_length: g_cost[at(gc)],
        waypoints,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Moving,
    Arrived,
    /// The next motion would enter an occupied cell; caller should replan.
    Blocked,
}

#[derive(Clone, Debug)]
pub struct StepResult {
    /// Commanded (linear, angular) velocity.
    pub command: (f64, f64),
    pub pose: Pose,
    pub status: StepStatus,
}

/// Rotate-then-move waypoint follower. Commands stay within the motion
/// limits and a step never moves the agent through or into an occupied
/// cell.
#[derive(Clone, Debug)]
pub struct PathFollower {
    path: Path,
    next: usize,
}

impl PathFollower {
    pub fn new(path: Path) -> Self {
        PathFollower { path, next: 0 }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn step(
        &mut self,
        agent: &Pose,
        grid: &OccupancyGrid,
        motion: &MotionConfig,
        cfg: &PlannerConfig,
        dt: f64,
    ) -> StepResult {
        while self.next < self.path.waypoints.len()
            && agent.position.dist(self.path.waypoints[self.next]) <= cfg.capture_radius
        {
            // skipping a captured waypoint must not cut a corner the path
            // went around
            if self.next + 1 < self.path.waypoints.len()
                && !swept_free(grid, agent.position, self.path.waypoints[self.next + 1])
            {
                break;
            }
            self.next += 1;
        }
        if self.next >= self.path.waypoints.len() {
            return StepResult {
                command: (0.0, 0.0),
                pose: Pose::new(agent.position, agent.heading),
                status: StepStatus::Arrived,
            };
        }

        let target = self.path.waypoints[self.next];
        let to_target = target - agent.position;
        let bearing = to_target.angle();
        let err = wrap_angle(bearing - agent.heading);
        let xi_dot = (2.0 * err).clamp(-motion.xi_dot_max, motion.xi_dot_max);
        let new_heading = wrap_angle(agent.heading + xi_dot * dt);

        let v = if err.abs() > cfg.align_threshold {
            0.0
        } else {
            // slow down while still turning toward the waypoint
            (to_target.norm() / dt).min(motion.v_max) * err.cos().max(0.0)
        };

        if v == 0.0 {
            let pose = Pose::new(agent.position, new_heading);
            return StepResult {
                command: (0.0, xi_dot),
                pose,
                status: StepStatus::Moving,
            };
        }

        let delta = Vec2::new(new_heading.cos(), new_heading.sin()) * (v * dt);
        let dest = agent.position + delta;
        if !swept_free(grid, agent.position, dest) {
            let pose = Pose::new(agent.position, new_heading);
            return StepResult {
                command: (0.0, xi_dot),
                pose,
                status: StepStatus::Blocked,
            };
        }
        let pose = Pose::new(dest, new_heading).with_velocity(delta / dt);
        StepResult {
            command: (v, xi_dot),
            pose,
            status: StepStatus::Moving,
        }
    }
}

/// True when the swept segment crosses no occupied cell and ends in a free
/// cell inside the map.
fn swept_free(grid: &OccupancyGrid, from: Vec2, to: Vec2) -> bool {
    let dest = grid.cell_of(to);
    if !grid.in_bounds(dest) || grid.get(dest) != Cell::Free {
        return false;
    }
    supercover(grid.cell_of(from), dest)
        .into_iter()
        .all(|c| grid.get(c) != Cell::Occupied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn open_grid(w: usize, h: usize, res: f64) -> OccupancyGrid {
        let mut g = OccupancyGrid::new(w, h, res);
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                g.set(CellIdx::new(x, y), Cell::Free);
            }
        }
        g
    }

    /// Uniform-cost search sharing only the adjacency definition.
    fn dijkstra_cost(grid: &OccupancyGrid, start: CellIdx, goal: CellIdx) -> Option<f64> {
        let w = grid.width();
        let at = |c: CellIdx| c.y as usize * w + c.x as usize;
        let mut dist = vec![f64::INFINITY; w * grid.height()];
        dist[at(start)] = 0.0;
        let mut frontier = vec![start];
        while !frontier.is_empty() {
            // deliberately naive: repeatedly relax the cheapest node
            frontier.sort_by(|a, b| dist[at(*b)].total_cmp(&dist[at(*a)]));
            let cur = frontier.pop().unwrap();
            for (n, step) in neighbors(grid, cur) {
                if dist[at(cur)] + step < dist[at(n)] - 1e-12 {
                    dist[at(n)] = dist[at(cur)] + step;
                    frontier.push(n);
                }
            }
        }
        dist[at(goal)].is_finite().then(|| dist[at(goal)])
    }

    #[test]
    fn straight_line_on_empty_grid() {
        let g = open_grid(12, 12, 1.0);
        let cfg = PlannerConfig::default();
        let p = plan_path(&g, Vec2::new(1.5, 1.5), Vec2::new(6.5, 1.5), &cfg).unwrap();
        assert!((p.total_length - 5.0).abs() < 1e-9);
        // pure diagonal
        let p = plan_path(&g, Vec2::new(1.5, 1.5), Vec2::new(6.5, 6.5), &cfg).unwrap();
        assert!((p.total_length - 5.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn goal_equals_start() {
        let g = open_grid(6, 6, 0.5);
        let cfg = PlannerConfig::default();
        let p = plan_path(&g, Vec2::new(1.25, 1.25), Vec2::new(1.25, 1.25), &cfg).unwrap();
        assert_eq!(p.waypoints.len(), 1);
        assert_eq!(p.total_length, 0.0);
    }

    #[test]
    fn u_shaped_wall_detour() {
        let mut g = open_grid(15, 15, 1.0);
        // U opening downward around the goal at (7, 7): walls on three sides
        for x in 4..=10 {
            g.set(CellIdx::new(x, 9), Cell::Occupied);
        }
        for y in 4..=9 {
            g.set(CellIdx::new(4, y), Cell::Occupied);
            g.set(CellIdx::new(10, y), Cell::Occupied);
        }
        let cfg = PlannerConfig::default();
        let start = Vec2::new(7.5, 12.5);
        let goal = Vec2::new(7.5, 7.5);
        let p = plan_path(&g, start, goal, &cfg).unwrap();
        let d = dijkstra_cost(&g, g.cell_of(start), g.cell_of(goal)).unwrap();
        assert!((p.total_length - d).abs() < 1e-9);
        assert!(p.total_length > 9.0); // forced around the U
    }

    #[test]
    fn unreachable_goal_is_an_error() {
        let mut g = open_grid(10, 10, 1.0);
        for y in 0..10 {
            g.set(CellIdx::new(5, y), Cell::Occupied);
        }
        let cfg = PlannerConfig::default();
        let err = plan_path(&g, Vec2::new(1.5, 1.5), Vec2::new(8.5, 1.5), &cfg).unwrap_err();
        assert!(matches!(err, PlanError::Unreachable));
    }

    #[test]
    fn non_free_goal_snaps_within_radius() {
        let mut g = open_grid(10, 10, 0.5);
        let wall = CellIdx::new(6, 4);
        g.set(wall, Cell::Occupied);
        let cfg = PlannerConfig::default();
        let goal = g.center_of(wall);
        let p = plan_path(&g, Vec2::new(0.75, 0.75), goal, &cfg).unwrap();
        let last = *p.waypoints.last().unwrap();
        assert!(last.dist(goal) <= cfg.snap_radius + 1e-9);
        assert_eq!(g.get(g.cell_of(last)), Cell::Free);
    }

    #[test]
    fn astar_matches_dijkstra_on_random_grids() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        let cfg = PlannerConfig::default();
        let mut compared = 0;
        for _ in 0..200 {
            let w = rng.random_range(8..=64);
            let h = rng.random_range(8..=64);
            let mut g = OccupancyGrid::new(w, h, 0.5);
            for y in 0..h as i32 {
                for x in 0..w as i32 {
                    let v = if rng.random_bool(0.25) {
                        Cell::Occupied
                    } else {
                        Cell::Free
                    };
                    g.set(CellIdx::new(x, y), v);
                }
            }
            let sc = CellIdx::new(
                rng.random_range(0..w as i32),
                rng.random_range(0..h as i32),
            );
            let gc = CellIdx::new(
                rng.random_range(0..w as i32),
                rng.random_range(0..h as i32),
            );
            if g.get(sc) != Cell::Free || g.get(gc) != Cell::Free {
                continue;
            }
            let astar = plan_path(&g, g.center_of(sc), g.center_of(gc), &cfg);
            let oracle = dijkstra_cost(&g, sc, gc);
            match (astar, oracle) {
                (Ok(p), Some(d)) => {
                    assert!((p.total_length - d).abs() < 1e-9);
                    compared += 1;
                }
                (Err(PlanError::Unreachable), None) => {}
                (a, o) => panic!("disagreement: {:?} vs {:?}", a.map(|p| p.total_length), o),
            }
        }
        assert!(compared > 50, "too few comparable cases: {compared}");
    }

    #[test]
    fn follower_translates_when_aligned() {
        let g = open_grid(10, 10, 1.0);
        let motion = MotionConfig::default();
        let cfg = PlannerConfig::default();
        let path = plan_path(&g, Vec2::new(1.5, 1.5), Vec2::new(7.5, 1.5), &cfg).unwrap();
        let mut follower = PathFollower::new(path);
        let agent = Pose::new(Vec2::new(1.5, 1.5), 0.0);
        let r = follower.step(&agent, &g, &motion, &cfg, 1.0);
        assert_eq!(r.status, StepStatus::Moving);
        assert!(r.command.0 > 0.0 && r.command.0 <= motion.v_max);
        assert!(r.pose.position.x > agent.position.x);
    }

    #[test]
    fn follower_rotates_for_waypoint_behind() {
        let g = open_grid(10, 10, 1.0);
        let motion = MotionConfig::default();
        let cfg = PlannerConfig::default();
        let path = plan_path(&g, Vec2::new(7.5, 1.5), Vec2::new(1.5, 1.5), &cfg).unwrap();
        let mut follower = PathFollower::new(path);
        let agent = Pose::new(Vec2::new(7.5, 1.5), 0.0); // target is behind
        let r = follower.step(&agent, &g, &motion, &cfg, 1.0);
        assert_eq!(r.command.0, 0.0); // rotation only
        assert!(r.command.1.abs() <= motion.xi_dot_max + 1e-12);
        assert!(r.command.1.abs() > 0.0);
    }

    #[test]
    fn corridor_run_is_collision_free_and_arrives() {
        let mut g = open_grid(20, 7, 0.5);
        for x in 0..20 {
            g.set(CellIdx::new(x, 0), Cell::Occupied);
            g.set(CellIdx::new(x, 6), Cell::Occupied);
        }
        let motion = MotionConfig::default();
        let cfg = PlannerConfig::default();
        let start = Vec2::new(0.75, 1.75);
        let goal = Vec2::new(9.25, 1.75);
        let path = plan_path(&g, start, goal, &cfg).unwrap();
        let mut follower = PathFollower::new(path);
        let mut agent = Pose::new(start, std::f64::consts::FRAC_PI_2);
        let mut arrived = false;
        for _ in 0..200 {
            let r = follower.step(&agent, &g, &motion, &cfg, 0.25);
            assert_ne!(g.get(g.cell_of(r.pose.position)), Cell::Occupied);
            assert!(r.command.0 <= motion.v_max + 1e-12);
            assert!(r.command.1.abs() <= motion.xi_dot_max + 1e-12);
            agent = r.pose;
            if r.status == StepStatus::Arrived {
                arrived = true;
                break;
            }
        }
        assert!(arrived, "agent stuck at {:?}", agent.position);
        assert!(agent.position.dist(goal) <= cfg.capture_radius + 1e-9);
    }

    #[test]
    fn blocked_step_reports_and_stays_safe() {
        let mut g = open_grid(10, 3, 0.5);
        // free corridor with a wall right in front of the agent; the stale
        // path still points through it
        let path = Path {
            waypoints: vec![Vec2::new(3.25, 0.75)],
            total_length: 1.9,
        };
        g.set(CellIdx::new(3, 1), Cell::Occupied);
        let motion = MotionConfig::default();
        let cfg = PlannerConfig::default();
        let mut follower = PathFollower::new(path);
        let agent = Pose::new(Vec2::new(1.35, 0.75), 0.0);
        let r = follower.step(&agent, &g, &motion, &cfg, 1.0);
        assert_eq!(r.status, StepStatus::Blocked);
        assert_eq!(r.command.0, 0.0);
        assert_eq!(r.pose.position, agent.position);
    }
}
