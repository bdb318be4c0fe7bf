//! Scene files: the ground-truth map the simulator runs against.
//!
//! JSON with a versioned header; see docs/formats.md for the schema.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{wrap_angle, Pose, Vec2};

use super::{Cell, CellIdx, OccupancyGrid, SensorSpec, WorldError};

pub const SCENE_FORMAT: &str = "scene";
pub const SCENE_VERSION: u32 = 1;

/// Inclusive cell-coordinate rectangle of wall cells.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallRect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

/// An object placed in the scene: id, label, footprint center and extent.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub id: String,
    pub label: String,
    /// Footprint center in meters.
    pub position: [f64; 2],
    /// Footprint extent (width, depth) in meters.
    pub extent: [f64; 2],
    /// Object height in meters; gives the sample points their z range.
    #[serde(default = "default_height")]
    pub height: f64,
}

fn default_height() -> f64 {
    1.0
}

impl SceneObject {
    pub fn center(&self) -> Vec2 {
        Vec2::new(self.position[0], self.position[1])
    }

    /// Deterministically sample `count` points inside the object's volume.
    pub fn sample_points<R: Rng>(&self, rng: &mut R, count: usize) -> Vec<[f64; 3]> {
        (0..count)
            .map(|_| {
                [
                    self.position[0] + (rng.random::<f64>() - 0.5) * self.extent[0],
                    self.position[1] + (rng.random::<f64>() - 0.5) * self.extent[1],
                    rng.random::<f64>() * self.height,
                ]
            })
            .collect()
    }
}

/// Ground-truth scene description.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Meters per cell.
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub wall_cells: Vec<[i32; 2]>,
    #[serde(default)]
    pub wall_rects: Vec<WallRect>,
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    /// When true, object footprints also occupy cells.
    #[serde(default)]
    pub objects_block: bool,
}

impl Scene {
    pub fn new(width: usize, height: usize, resolution: f64) -> Self {
        Scene {
            format: SCENE_FORMAT.to_string(),
            version: SCENE_VERSION,
            name: None,
            resolution,
            width,
            height,
            wall_cells: Vec::new(),
            wall_rects: Vec::new(),
            objects: Vec::new(),
            objects_block: false,
        }
    }

    pub fn load(path: &Path) -> Result<Scene, WorldError> {
        let text = std::fs::read_to_string(path)?;
        let scene: Scene = serde_json::from_str(&text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn save(&self, path: &Path) -> Result<(), WorldError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let err = |m: String| Err(WorldError::InvalidScene(m));
        if self.format != SCENE_FORMAT {
            return err(format!("unexpected format {:?}", self.format));
        }
        if self.version != SCENE_VERSION {
            return err(format!("unsupported scene version {}", self.version));
        }
        if self.resolution <= 0.0 {
            return err("resolution must be > 0".into());
        }
        if self.width == 0 || self.height == 0 {
            return err("grid dimensions must be non-zero".into());
        }
        let (w, h) = (self.width as i32, self.height as i32);
        for &[x, y] in &self.wall_cells {
            if x < 0 || y < 0 || x >= w || y >= h {
                return err(format!("wall cell ({x}, {y}) out of bounds"));
            }
        }
        for r in &self.wall_rects {
            if r.x0 > r.x1 || r.y0 > r.y1 || r.x0 < 0 || r.y0 < 0 || r.x1 >= w || r.y1 >= h {
                return err(format!("wall rect {:?} invalid", r));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for o in &self.objects {
            if !ids.insert(&o.id) {
                return err(format!("duplicate object id {:?}", o.id));
            }
            if o.extent[0] <= 0.0 || o.extent[1] <= 0.0 || o.height <= 0.0 {
                return err(format!("object {:?} has non-positive extent", o.id));
            }
            let p = o.center();
            if p.x < 0.0
                || p.y < 0.0
                || p.x >= self.width as f64 * self.resolution
                || p.y >= self.height as f64 * self.resolution
            {
                return err(format!("object {:?} outside the map", o.id));
            }
        }
        Ok(())
    }

    /// Fully known grid: walls Occupied, everything else Free.
    pub fn ground_truth(&self) -> OccupancyGrid {
        let mut g = OccupancyGrid::new(self.width, self.height, self.resolution);
        for y in 0..self.height as i32 {
            for x in 0..self.width as i32 {
                g.set(CellIdx::new(x, y), Cell::Free);
            }
        }
        for &[x, y] in &self.wall_cells {
            g.set(CellIdx::new(x, y), Cell::Occupied);
        }
        for r in &self.wall_rects {
            for y in r.y0..=r.y1 {
                for x in r.x0..=r.x1 {
                    g.set(CellIdx::new(x, y), Cell::Occupied);
                }
            }
        }
        if self.objects_block {
            for o in &self.objects {
                let min = o.center() - Vec2::new(o.extent[0] / 2.0, o.extent[1] / 2.0);
                let max = o.center() + Vec2::new(o.extent[0] / 2.0, o.extent[1] / 2.0);
                let c0 = g.cell_of(min);
                let c1 = g.cell_of(max);
                for y in c0.y..=c1.y {
                    for x in c0.x..=c1.x {
                        g.set(CellIdx::new(x, y), Cell::Occupied);
                    }
                }
            }
        }
        g
    }
}

/// A visible object as reported by the simulated detector.
#[derive(Clone, Debug)]
pub struct Detection {
    /// Index into `scene.objects`.
    pub object_index: usize,
    pub label: String,
    /// Bearing relative to the agent heading, in (-pi, pi].
    pub bearing: f64,
    pub distance: f64,
}

/// Objects visible from `pose`: within range and field of view, with an
/// unblocked supercover line of sight to the object center.
pub fn visible_objects(
    scene: &Scene,
    truth: &OccupancyGrid,
    pose: &Pose,
    sensor: &SensorSpec,
) -> Vec<Detection> {
    let agent_cell = truth.cell_of(pose.position);
    let full_circle = sensor.fov >= std::f64::consts::TAU - 1e-9;
    let mut out = Vec::new();
    for (i, obj) in scene.objects.iter().enumerate() {
        let offset = obj.center() - pose.position;
        let dist = offset.norm();
        if dist > sensor.range + 1e-9 {
            continue;
        }
        let world_bearing = if dist > 1e-9 { offset.angle() } else { pose.heading };
        if !full_circle
            && dist > 1e-9
            && crate::geom::angle_diff(world_bearing, pose.heading) > sensor.fov / 2.0 + 1e-9
        {
            continue;
        }
        let target_cell = truth.cell_of(obj.center());
        if !truth.line_of_sight(agent_cell, target_cell) {
            continue;
        }
        out.push(Detection {
            object_index: i,
            label: obj.label.clone(),
            bearing: wrap_angle(world_bearing - pose.heading),
            distance: dist,
        });
    }
    out
}
