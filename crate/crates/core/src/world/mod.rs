//! World model: occupancy grid, agent pose, raycasting, frontier
//! extraction, and the scene files that define ground truth.

mod frontier;
mod grid;
mod scene;

pub use frontier::{extract_frontiers, Frontier};
pub use grid::{supercover, Cell, CellIdx, Conversion, ObservationDelta, OccupancyGrid};
pub use scene::{visible_objects, Detection, Scene, SceneObject, WallRect};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Field-of-view spec for the simulated sensor.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorSpec {
    /// Maximum sensing range in meters.
    pub range: f64,
    /// Angular aperture in radians; `TAU` means omnidirectional.
    pub fov: f64,
}

impl Default for SensorSpec {
    fn default() -> Self {
        SensorSpec {
            range: 3.0,
            fov: std::f64::consts::TAU,
        }
    }
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("pose ({x}, {y}) outside grid bounds")]
    PoseOutOfBounds { x: f64, y: f64 },
    #[error("scene validation failed: {0}")]
    InvalidScene(String),
    #[error("scene io: {0}")]
    Io(#[from] std::io::Error),
    #[error("scene parse: {0}")]
    Parse(#[from] serde_json::Error),
}
