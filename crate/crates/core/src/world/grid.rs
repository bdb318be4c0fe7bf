//! Occupancy grid, supercover ray traversal, observation integration, and
//! the openness raycast used by the local-structure cost.

use serde::{Deserialize, Serialize};

use crate::geom::{Pose, Vec2};
use crate::memory::AnchorId;

use super::{SensorSpec, WorldError};

/// Per-cell knowledge state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    #[default]
    Unknown,
    Free,
    Occupied,
}

/// Integer cell coordinate (column, row). Signed so neighbor math can go
/// out of bounds without wrapping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIdx {
    pub x: i32,
    pub y: i32,
}

impl CellIdx {
    pub fn new(x: i32, y: i32) -> Self {
        CellIdx { x, y }
    }
}

/// Record of the observation that first converted a cell out of Unknown.
#[derive(Clone, Copy, Debug)]
pub struct Conversion {
    /// Monotone step index of the converting observation.
    pub stamp: u64,
    /// Visual anchor associated with that observation, when the frame was
    /// selected as an anchor.
    pub anchor: Option<AnchorId>,
}

/// Cells newly observed by one `integrate_observation` call.
#[derive(Clone, Debug, Default)]
pub struct ObservationDelta {
    pub converted: Vec<CellIdx>,
}

/// 2D occupancy grid. Cell (0,0) has its corner at the world origin; the
/// center of cell (x,y) is at ((x+0.5)·res, (y+0.5)·res).
///
/// Single-writer: only the perception tick mutates the grid. Snapshots for
/// other threads are plain clones (the type is `Send + Sync` by value).
#[derive(Clone, Debug)]
pub struct OccupancyGrid {
    resolution: f64,
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    conversions: Vec<Option<Conversion>>,
}

impl OccupancyGrid {
    /// All-Unknown grid. Panics if `resolution <= 0` or a dimension is zero.
    pub fn new(width: usize, height: usize, resolution: f64) -> Self {
        assert!(resolution > 0.0, "resolution must be strictly positive");
        assert!(width > 0 && height > 0, "grid dimensions must be non-zero");
        OccupancyGrid {
            resolution,
            width,
            height,
            cells: vec![Cell::Unknown; width * height],
            conversions: vec![None; width * height],
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, c: CellIdx) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub fn in_bounds_point(&self, p: Vec2) -> bool {
        p.x >= 0.0
            && p.y >= 0.0
            && p.x < self.width as f64 * self.resolution
            && p.y < self.height as f64 * self.resolution
    }

    fn idx(&self, c: CellIdx) -> usize {
        c.y as usize * self.width + c.x as usize
    }

    pub fn get(&self, c: CellIdx) -> Cell {
        if self.in_bounds(c) {
            self.cells[self.idx(c)]
        } else {
            Cell::Unknown
        }
    }

    pub fn set(&mut self, c: CellIdx, v: Cell) {
        if self.in_bounds(c) {
            let i = self.idx(c);
            self.cells[i] = v;
        }
    }

    pub fn conversion(&self, c: CellIdx) -> Option<Conversion> {
        if self.in_bounds(c) {
            self.conversions[self.idx(c)]
        } else {
            None
        }
    }

    /// Cell containing a world point.
    pub fn cell_of(&self, p: Vec2) -> CellIdx {
        CellIdx::new(
            (p.x / self.resolution).floor() as i32,
            (p.y / self.resolution).floor() as i32,
        )
    }

    /// World coordinates of a cell center.
    pub fn center_of(&self, c: CellIdx) -> Vec2 {
        Vec2::new(
            (c.x as f64 + 0.5) * self.resolution,
            (c.y as f64 + 0.5) * self.resolution,
        )
    }

    pub fn count(&self, v: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == v).count()
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (CellIdx, Cell)> + '_ {
        (0..self.height).flat_map(move |y| {
            (0..self.width).map(move |x| {
                let c = CellIdx::new(x as i32, y as i32);
                (c, self.cells[self.idx(c)])
            })
        })
    }

    /// True when every cell on the segment strictly before `to` is
    /// non-Occupied. `from` itself participates in the check.
    pub fn line_of_sight(&self, from: CellIdx, to: CellIdx) -> bool {
        let walk = supercover(from, to);
        for &c in &walk[..walk.len().saturating_sub(1)] {
            if self.get(c) == Cell::Occupied {
                return false;
            }
        }
        true
    }

    /// Fold ground-truth cells visible from `pose` into this grid.
    ///
    /// Every cell whose center lies inside the sensor frustum and whose
    /// supercover ray from the agent cell is not blocked by a ground-truth
    /// Occupied cell takes its ground-truth state. Known cells never revert
    /// to Unknown; repeating an identical observation is a no-op.
    pub fn integrate_observation(
        &mut self,
        truth: &OccupancyGrid,
        pose: &Pose,
        sensor: &SensorSpec,
        observer: Option<AnchorId>,
        stamp: u64,
    ) -> Result<ObservationDelta, WorldError> {
        if !self.in_bounds_point(pose.position) {
            return Err(WorldError::PoseOutOfBounds {
                x: pose.position.x,
                y: pose.position.y,
            });
        }
        assert_eq!(self.width, truth.width);
        assert_eq!(self.height, truth.height);

        let agent_cell = self.cell_of(pose.position);
        let r_cells = (sensor.range / self.resolution).ceil() as i32 + 1;
        let full_circle = sensor.fov >= std::f64::consts::TAU - 1e-9;
        let mut delta = ObservationDelta::default();

        for dy in -r_cells..=r_cells {
            for dx in -r_cells..=r_cells {
                let c = CellIdx::new(agent_cell.x + dx, agent_cell.y + dy);
                if !self.in_bounds(c) {
                    continue;
                }
                let center = self.center_of(c);
                let offset = center - pose.position;
                let dist = offset.norm();
                if dist > sensor.range + 1e-9 {
                    continue;
                }
                if !full_circle && dist > 1e-9 {
                    let bearing = offset.angle();
                    if crate::geom::angle_diff(bearing, pose.heading) > sensor.fov / 2.0 + 1e-9 {
                        continue;
                    }
                }
                if !truth.line_of_sight(agent_cell, c) {
                    continue;
                }
                let new = truth.get(c);
                let i = self.idx(c);
                if self.cells[i] == Cell::Unknown && new != Cell::Unknown {
                    self.conversions[i] = Some(Conversion {
                        stamp,
                        anchor: observer,
                    });
                    delta.converted.push(c);
                }
                self.cells[i] = new;
            }
        }
        Ok(delta)
    }

    /// Openness h_k for the local-structure cost: march a discrete ray from
    /// `viewpoint` toward (and past) `center` for up to `h_max` meters; the
    /// first non-Unknown cell hit yields `dist(hit, center)`, clamped into
    /// [0, h_max]. No hit, a degenerate ray, or leaving the map returns
    /// `h_max`. The viewpoint's own cell is not a candidate hit.
    pub fn raycast_openness(&self, viewpoint: Vec2, center: Vec2, h_max: f64) -> f64 {
        let dir = match (center - viewpoint).normalized() {
            Some(d) => d,
            None => return h_max, // zero-length ray by convention
        };
        let start = self.cell_of(viewpoint);
        let end = self.cell_of(viewpoint + dir * (h_max + self.resolution));
        let walk = supercover(start, end);
        for &c in walk.iter().skip(1) {
            if !self.in_bounds(c) {
                break;
            }
            let cc = self.center_of(c);
            if cc.dist(viewpoint) > h_max + 1e-9 {
                break;
            }
            if self.get(c) != Cell::Unknown {
                return cc.dist(center).min(h_max);
            }
        }
        h_max
    }
}

/// Supercover line traversal: every cell the segment from `a` to `b`
/// touches, including both endpoints and, at exact corner crossings, both
/// side cells. Cells are emitted in walk order from `a` to `b`.
pub fn supercover(a: CellIdx, b: CellIdx) -> Vec<CellIdx> {
    let (mut x, mut y) = (a.x, a.y);
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let xstep = if dx > 0 { 1 } else { -1 };
    let ystep = if dy > 0 { 1 } else { -1 };
    let dx = dx.abs();
    let dy = dy.abs();
    let ddx = 2 * dx;
    let ddy = 2 * dy;

    let mut out = Vec::with_capacity((dx + dy + 1) as usize);
    out.push(a);

    if ddx >= ddy {
        let mut error = dx;
        let mut errorprev = dx;
        for _ in 0..dx {
            x += xstep;
            error += ddy;
            if error > ddx {
                y += ystep;
                error -= ddx;
                if error + errorprev < ddx {
                    out.push(CellIdx::new(x, y - ystep));
                } else if error + errorprev > ddx {
                    out.push(CellIdx::new(x - xstep, y));
                } else {
                    // exact corner crossing: both side cells are touched
                    out.push(CellIdx::new(x, y - ystep));
                    out.push(CellIdx::new(x - xstep, y));
                }
            }
            out.push(CellIdx::new(x, y));
            errorprev = error;
        }
    } else {
        let mut error = dy;
        let mut errorprev = dy;
        for _ in 0..dy {
            y += ystep;
            error += ddx;
            if error > ddy {
                x += xstep;
                error -= ddy;
                if error + errorprev < ddy {
                    out.push(CellIdx::new(x - xstep, y));
                } else if error + errorprev > ddy {
                    out.push(CellIdx::new(x, y - ystep));
                } else {
                    out.push(CellIdx::new(x - xstep, y));
                    out.push(CellIdx::new(x, y - ystep));
                }
            }
            out.push(CellIdx::new(x, y));
            errorprev = error;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    fn empty_truth(w: usize, h: usize, res: f64) -> OccupancyGrid {
        let mut g = OccupancyGrid::new(w, h, res);
        for y in 0..h as i32 {
            for x in 0..w as i32 {
                g.set(CellIdx::new(x, y), Cell::Free);
            }
        }
        g
    }

    fn full_sensor(range: f64) -> SensorSpec {
        SensorSpec {
            range,
            fov: std::f64::consts::TAU,
        }
    }

    #[test]
    fn supercover_visits_every_crossed_cell() {
        // Straight lines
        let cells = supercover(CellIdx::new(0, 0), CellIdx::new(3, 0));
        assert_eq!(
            cells,
            vec![
                CellIdx::new(0, 0),
                CellIdx::new(1, 0),
                CellIdx::new(2, 0),
                CellIdx::new(3, 0)
            ]
        );
        // Exact diagonal must include both corner-adjacent cells
        let cells = supercover(CellIdx::new(0, 0), CellIdx::new(2, 2));
        assert!(cells.contains(&CellIdx::new(1, 0)) && cells.contains(&CellIdx::new(0, 1)));
        assert!(cells.contains(&CellIdx::new(1, 1)));
        assert_eq!(*cells.last().unwrap(), CellIdx::new(2, 2));
    }

    #[test]
    fn supercover_endpoints_and_reversal_cover_same_cells() {
        use std::collections::BTreeSet;
        for &(ax, ay, bx, by) in &[(0, 0, 5, 2), (1, 7, 6, 3), (4, 4, 4, 4), (-2, 1, 3, -3)] {
            let f: BTreeSet<_> = supercover(CellIdx::new(ax, ay), CellIdx::new(bx, by))
                .into_iter()
                .collect();
            let r: BTreeSet<_> = supercover(CellIdx::new(bx, by), CellIdx::new(ax, ay))
                .into_iter()
                .collect();
            assert_eq!(f, r);
        }
    }

    #[test]
    fn observe_unobstructed_disk() {
        // Agent centered in an empty 10x10 grid with a 360-degree range-2
        // sensor: every cell within distance 2 becomes Free.
        let truth = empty_truth(10, 10, 1.0);
        let mut grid = OccupancyGrid::new(10, 10, 1.0);
        let pose = Pose::new(Vec2::new(4.5, 4.5), 0.0); // center of cell (4,4)
        grid.integrate_observation(&truth, &pose, &full_sensor(2.0), None, 1)
            .unwrap();
        for (c, v) in grid.iter_cells() {
            let d = grid.center_of(c).dist(pose.position);
            if d <= 2.0 + 1e-9 {
                assert_eq!(v, Cell::Free, "cell {:?} at distance {}", c, d);
            } else {
                assert_eq!(v, Cell::Unknown, "cell {:?} at distance {}", c, d);
            }
        }
    }

    #[test]
    fn observe_occlusion_behind_wall() {
        let mut truth = empty_truth(11, 11, 1.0);
        // vertical wall at x=6 blocking the right side from the agent at (4,5)
        for y in 0..11 {
            truth.set(CellIdx::new(6, y), Cell::Occupied);
        }
        let mut grid = OccupancyGrid::new(11, 11, 1.0);
        let pose = Pose::new(Vec2::new(4.5, 5.5), 0.0);
        grid.integrate_observation(&truth, &pose, &full_sensor(5.0), None, 1)
            .unwrap();
        // wall cell itself is observed as Occupied
        assert_eq!(grid.get(CellIdx::new(6, 5)), Cell::Occupied);
        // cells beyond the wall stay Unknown
        for y in 0..11 {
            assert_eq!(grid.get(CellIdx::new(7, y)), Cell::Unknown);
            assert_eq!(grid.get(CellIdx::new(8, y)), Cell::Unknown);
        }
    }

    #[test]
    fn observe_is_idempotent_and_monotone() {
        let mut truth = empty_truth(12, 12, 0.5);
        truth.set(CellIdx::new(6, 6), Cell::Occupied);
        let mut grid = OccupancyGrid::new(12, 12, 0.5);
        let pose = Pose::new(Vec2::new(2.25, 2.25), 0.3);
        let sensor = full_sensor(2.0);
        grid.integrate_observation(&truth, &pose, &sensor, None, 1)
            .unwrap();
        let unknown_before = grid.count(Cell::Unknown);
        let snapshot = grid.clone();
        let delta = grid
            .integrate_observation(&truth, &pose, &sensor, None, 2)
            .unwrap();
        assert!(delta.converted.is_empty());
        assert_eq!(grid.count(Cell::Unknown), unknown_before);
        for (c, v) in snapshot.iter_cells() {
            assert_eq!(grid.get(c), v);
        }
    }

    #[test]
    fn observe_rejects_out_of_bounds_pose() {
        let truth = empty_truth(5, 5, 1.0);
        let mut grid = OccupancyGrid::new(5, 5, 1.0);
        let pose = Pose::new(Vec2::new(-1.0, 2.0), 0.0);
        let err = grid
            .integrate_observation(&truth, &pose, &full_sensor(2.0), None, 1)
            .unwrap_err();
        assert!(matches!(err, WorldError::PoseOutOfBounds { .. }));
    }

    #[test]
    fn openness_truncates_in_open_corridor() {
        // Everything along the ray is Unknown: no observed cell within
        // h_max=5 -> 5.0.
        let mut grid = OccupancyGrid::new(40, 5, 0.5);
        grid.set(CellIdx::new(1, 2), Cell::Free); // viewpoint cell only
        let vp = grid.center_of(CellIdx::new(1, 2));
        let center = grid.center_of(CellIdx::new(6, 2));
        assert_eq!(grid.raycast_openness(vp, center, 5.0), 5.0);
    }

    #[test]
    fn openness_zero_at_observed_center() {
        let mut grid = OccupancyGrid::new(40, 5, 0.5);
        grid.set(CellIdx::new(1, 2), Cell::Free);
        let center_cell = CellIdx::new(8, 2);
        grid.set(center_cell, Cell::Free); // observed cell exactly at the center
        let vp = grid.center_of(CellIdx::new(1, 2));
        let center = grid.center_of(center_cell);
        assert!(grid.raycast_openness(vp, center, 5.0).abs() < 1e-9);
    }

    #[test]
    fn openness_wall_before_center() {
        // Wall 1 m from the viewpoint, center 3 m away: h = dist(hit, center) = 2.
        let res = 0.5;
        let mut grid = OccupancyGrid::new(40, 5, res);
        let vp_cell = CellIdx::new(1, 2);
        grid.set(vp_cell, Cell::Free);
        let vp = grid.center_of(vp_cell);
        let wall_cell = CellIdx::new(3, 2); // center 1.0 m right of vp
        grid.set(wall_cell, Cell::Occupied);
        let center = Vec2::new(vp.x + 3.0, vp.y);
        let h = grid.raycast_openness(vp, center, 5.0);
        assert!((h - 2.0).abs() < 1e-9, "h = {}", h);

        // Independent cell-walk oracle: first non-Unknown cell after the start.
        let end = grid.cell_of(vp + Vec2::new(5.0 + res, 0.0));
        let mut expect = 5.0_f64;
        for c in supercover(vp_cell, end).into_iter().skip(1) {
            if !grid.in_bounds(c) || grid.center_of(c).dist(vp) > 5.0 {
                break;
            }
            if grid.get(c) != Cell::Unknown {
                expect = grid.center_of(c).dist(center).min(5.0);
                break;
            }
        }
        assert!((h - expect).abs() < 1e-12);
    }

    #[test]
    fn openness_zero_length_ray_returns_h_max() {
        let grid = OccupancyGrid::new(10, 10, 1.0);
        let p = Vec2::new(3.5, 3.5);
        assert_eq!(grid.raycast_openness(p, p, 4.0), 4.0);
    }

    #[test]
    fn openness_always_in_range() {
        // Hitting an observed cell just past the viewpoint while the center
        // is far away must clamp to h_max.
        let mut grid = OccupancyGrid::new(40, 5, 0.5);
        for x in 1..6 {
            grid.set(CellIdx::new(x, 2), Cell::Free);
        }
        let vp = grid.center_of(CellIdx::new(1, 2));
        let center = Vec2::new(vp.x + 12.0, vp.y);
        let h = grid.raycast_openness(vp, center, 5.0);
        assert!((0.0..=5.0).contains(&h));
        assert_eq!(h, 5.0);
    }
}
