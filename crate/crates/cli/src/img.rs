//! Minimal binary PGM/PPM writers and the trajectory plot renderer.
//! Byte output is deterministic for fixed inputs.

use std::io::Write;
use std::path::Path;

use semnav_core::geom::Vec2;
use semnav_core::sim::{TraceEvent, TraceLog};
use semnav_core::world::{Cell, Scene};

use crate::CliError;

pub fn write_pgm(path: &Path, width: usize, height: usize, data: &[u8]) -> Result<(), CliError> {
    assert_eq!(data.len(), width * height);
    let mut out = Vec::with_capacity(data.len() + 32);
    write!(out, "P5\n{width} {height}\n255\n").expect("header");
    out.extend_from_slice(data);
    std::fs::write(path, out).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn write_ppm(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<(), CliError> {
    assert_eq!(rgb.len(), width * height * 3);
    let mut out = Vec::with_capacity(rgb.len() + 32);
    write!(out, "P6\n{width} {height}\n255\n").expect("header");
    out.extend_from_slice(rgb);
    std::fs::write(path, out).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
    /// Pixels per meter.
    scale: f64,
    /// World height in meters, for the y flip (image row 0 at the top).
    world_h: f64,
}

impl Canvas {
    fn put(&mut self, px: i64, py: i64, color: [u8; 3]) {
        if px < 0 || py < 0 || px >= self.width as i64 || py >= self.height as i64 {
            return;
        }
        let i = (py as usize * self.width + px as usize) * 3;
        self.rgb[i..i + 3].copy_from_slice(&color);
    }

    fn to_px(&self, p: Vec2) -> (i64, i64) {
        (
            (p.x * self.scale) as i64,
            ((self.world_h - p.y) * self.scale) as i64,
        )
    }

    pub fn dot(&mut self, p: Vec2, radius: i64, color: [u8; 3]) {
        let (cx, cy) = self.to_px(p);
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                if dx * dx + dy * dy <= radius * radius {
                    self.put(cx + dx, cy + dy, color);
                }
            }
        }
    }

    pub fn line(&mut self, a: Vec2, b: Vec2, color: [u8; 3]) {
        let (x0, y0) = self.to_px(a);
        let (x1, y1) = self.to_px(b);
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1);
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = x0 as f64 + (x1 - x0) as f64 * t;
            let y = y0 as f64 + (y1 - y0) as f64 * t;
            self.put(x.round() as i64, y.round() as i64, color);
        }
    }
}

/// Blue-to-red colormap over [0, 1].
pub fn colormap(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    [
        (255.0 * t) as u8,
        (64.0 * (1.0 - (2.0 * t - 1.0).abs())) as u8,
        (255.0 * (1.0 - t)) as u8,
    ]
}

/// Agent path over the ground-truth map, goal markers colormapped by the
/// selected frontier's score.
pub fn render_trajectory(scene: &Scene, trace: &TraceLog) -> Canvas {
    let scale = (3.0 / scene.resolution).round(); // 3 px per cell
    let world_h = scene.height as f64 * scene.resolution;
    let width = (scene.width as f64 * 3.0) as usize;
    let height = (scene.height as f64 * 3.0) as usize;
    let mut canvas = Canvas {
        width,
        height,
        rgb: vec![255; width * height * 3],
        scale,
        world_h,
    };

    // walls and object footprints
    let truth = scene.ground_truth();
    for (c, v) in truth.iter_cells() {
        if v == Cell::Occupied {
            let p = truth.center_of(c);
            let (px, py) = canvas.to_px(p);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    canvas.put(px + dx, py + dy, [40, 40, 40]);
                }
            }
        }
    }
    for obj in &scene.objects {
        let c = obj.center();
        canvas.dot(c, 3, [150, 200, 250]);
    }

    // score range over the trace for the goal colormap
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for e in &trace.events {
        if let TraceEvent::GoalSelected { score: Some(s), .. } = e {
            lo = lo.min(*s);
            hi = hi.max(*s);
        }
    }
    let span = (hi - lo).max(1e-9);

    let mut prev: Option<Vec2> = None;
    let mut ticks = 0usize;
    let total = trace
        .events
        .iter()
        .filter(|e| matches!(e, TraceEvent::Tick { .. }))
        .count()
        .max(1);
    for e in &trace.events {
        match e {
            TraceEvent::Tick { x, y, .. } => {
                let p = Vec2::new(*x, *y);
                if let Some(q) = prev {
                    // green darkening with time
                    let t = ticks as f64 / total as f64;
                    let g = 200 - (120.0 * t) as u8;
                    canvas.line(q, p, [20, g, 60]);
                }
                prev = Some(p);
                ticks += 1;
            }
            TraceEvent::GoalSelected {
                x, y, score: Some(s), ..
            } => {
                canvas.dot(Vec2::new(*x, *y), 2, colormap((s - lo) / span));
            }
            TraceEvent::TargetFound { x, y, .. } => {
                canvas.dot(Vec2::new(*x, *y), 4, [255, 0, 255]);
            }
            _ => {}
        }
    }
    if let Some(TraceEvent::Tick { x, y, .. }) = trace
        .events
        .iter()
        .find(|e| matches!(e, TraceEvent::Tick { .. }))
    {
        canvas.dot(Vec2::new(*x, *y), 3, [255, 140, 0]); // start
    }
    canvas
}
