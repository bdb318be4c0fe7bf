//! Procedural fixture scenes: generic multi-room layouts, the
//! divergence family where greedy goal selection and tour-based selection
//! part ways, and scripted ranking states for the frontier-scorer
//! comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Pose, Vec2};
use crate::memory::{
    AnchorId, CognitiveMemoryGraph, MergeConfig, ObservedObject, SymbolicView, ViewedObject,
    VisualAnchor,
};
use crate::oracle::{AffinityEntry, OracleTables};
use crate::world::{visible_objects, OccupancyGrid, Scene, SceneObject, SensorSpec, WallRect};

use super::episode::EpisodeSpec;

const RES: f64 = 0.25;

fn cell(m: f64) -> i32 {
    (m / RES).floor() as i32
}

fn add_rect(scene: &mut Scene, x0: f64, y0: f64, x1: f64, y1: f64) {
    scene.wall_rects.push(WallRect {
        x0: cell(x0),
        y0: cell(y0),
        x1: cell(x1).max(cell(x0)),
        y1: cell(y1).max(cell(y0)),
    });
}

fn add_border(scene: &mut Scene) {
    let w = scene.width as i32 - 1;
    let h = scene.height as i32 - 1;
    scene.wall_rects.push(WallRect { x0: 0, y0: 0, x1: w, y1: 0 });
    scene.wall_rects.push(WallRect { x0: 0, y0: h, x1: w, y1: h });
    scene.wall_rects.push(WallRect { x0: 0, y0: 0, x1: 0, y1: h });
    scene.wall_rects.push(WallRect { x0: w, y0: 0, x1: w, y1: h });
}

/// Horizontal wall along `y` from `x0` to `x1` with an optional door gap
/// `[dx0, dx1]`.
fn wall_h(scene: &mut Scene, y: f64, x0: f64, x1: f64, door: Option<(f64, f64)>) {
    match door {
        None => add_rect(scene, x0, y, x1, y),
        Some((d0, d1)) => {
            if d0 > x0 {
                add_rect(scene, x0, y, d0 - RES, y);
            }
            if d1 < x1 {
                add_rect(scene, d1 + RES, y, x1, y);
            }
        }
    }
}

fn wall_v(scene: &mut Scene, x: f64, y0: f64, y1: f64, door: Option<(f64, f64)>) {
    match door {
        None => add_rect(scene, x, y0, x, y1),
        Some((d0, d1)) => {
            if d0 > y0 {
                add_rect(scene, x, y0, x, d0 - RES);
            }
            if d1 < y1 {
                add_rect(scene, x, d1 + RES, x, y1);
            }
        }
    }
}

fn place(scene: &mut Scene, id: &str, label: &str, x: f64, y: f64, w: f64, d: f64) {
    scene.objects.push(SceneObject {
        id: id.to_string(),
        label: label.to_string(),
        position: [x, y],
        extent: [w, d],
        height: 1.0,
    });
}

/// A corridor flanked by three rooms per side. The bed lands in a random
/// room; the remaining rooms hold generic furniture.
pub fn multi_room(seed: u64) -> (Scene, EpisodeSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d72_6f6f_6d73);
    let mut scene = Scene::new(cell(22.0) as usize + 1, cell(15.0) as usize + 1, RES);
    scene.name = Some(format!("multi-room-{seed}"));
    add_border(&mut scene);

    // central corridor between x = 10 and x = 12
    let rows = [(0.25, 5.0), (5.0, 10.0), (10.0, 14.75)];
    for (i, &(y0, y1)) in rows.iter().enumerate() {
        // row-separating walls
        if i > 0 {
            wall_h(&mut scene, y0, 0.25, 10.0, None);
            wall_h(&mut scene, y0, 12.0, 21.75, None);
        }
        // corridor walls with one door per room
        let door_y = rng.random_range((y0 + 0.9)..(y1 - 1.9));
        wall_v(&mut scene, 10.0, y0, y1, Some((door_y, door_y + 1.0)));
        let door_y = rng.random_range((y0 + 0.9)..(y1 - 1.9));
        wall_v(&mut scene, 12.0, y0, y1, Some((door_y, door_y + 1.0)));
    }

    // room centers: (side, row)
    let mut rooms = Vec::new();
    for &(y0, y1) in &rows {
        rooms.push(Vec2::new(5.0, (y0 + y1) / 2.0));
        rooms.push(Vec2::new(17.0, (y0 + y1) / 2.0));
    }
    let bed_room = rng.random_range(0..rooms.len());
    let filler = ["chair", "table", "sofa", "tv", "plant", "sink"];
    for (i, center) in rooms.iter().enumerate() {
        let jx = rng.random_range(-1.5..1.5);
        let jy = rng.random_range(-1.0..1.0);
        if i == bed_room {
            place(&mut scene, "bed0", "bed", center.x + jx, center.y + jy, 2.0, 1.5);
            place(
                &mut scene,
                "night0",
                "nightstand",
                center.x + jx + 1.6,
                center.y + jy,
                0.6,
                0.6,
            );
        } else {
            let label = filler[rng.random_range(0..filler.len())];
            place(
                &mut scene,
                &format!("obj{i}"),
                label,
                center.x + jx,
                center.y + jy,
                1.0,
                1.0,
            );
        }
    }

    let spec = EpisodeSpec {
        id: format!("multi-room-{seed}"),
        scene: String::new(),
        start: [11.0, 7.5],
        start_heading: 0.0,
        instruction: "find the bed".into(),
        targets: vec!["bed".into()],
        success_radius: 1.5,
        max_steps: 700,
    };
    (scene, spec)
}

/// Oracle tables for the divergence family: a strong far-side decoy
/// ("wardrobe") and a slightly weaker near-side decoy ("blanket"), neither
/// of them boosted (only the bed's co-occurrence set is related). The gap
/// is a nose: enough for argmax to chase the wardrobes, small enough that
/// the exponential reweighting keeps the near cluster competitive.
pub fn divergence_tables() -> OracleTables {
    let mut t = OracleTables::default();
    t.vocabulary.insert("blanket".into());
    t.affinity.push(AffinityEntry {
        a: "blanket".into(),
        b: "bed".into(),
        score: 0.58,
    });
    t.affinity.push(AffinityEntry {
        a: "wardrobe".into(),
        b: "bed".into(),
        score: 0.65,
    });
    // the ranking fixtures need a label whose relatedness (field boost) and
    // raw affinity (view score) pull apart: slippers co-occur with beds but
    // match the instruction only weakly
    t.vocabulary.insert("slipper".into());
    t.affinity.push(AffinityEntry {
        a: "slipper".into(),
        b: "bed".into(),
        score: 0.3,
    });
    if let Some(rel) = t.cooccurrence.get_mut("bed") {
        rel.insert("slipper".into());
    }
    t
}

pub struct DivergenceFixture {
    pub scene: Scene,
    pub spec: EpisodeSpec,
    /// A point at the mouth of the decoy corridor: the wrong first goal.
    pub corridor_marker: Vec2,
    /// A point among the near-room doors: the right first region.
    pub near_marker: Vec2,
}

impl DivergenceFixture {
    /// Is this frontier centroid inside the decoy corridor mouth?
    pub fn is_corridor_pick(&self, p: Vec2) -> bool {
        p.x > 7.8 && p.y > 6.5 && p.y < 8.5
    }
}

/// The divergence layout: a row of three small rooms right above the
/// start (blanket decoys on their doorways, the bed inside one of them)
/// and a long wardrobe-lined corridor to the east whose mouth outranks
/// every doorway by a nose. Greedy argmax chases the corridor end to end;
/// the weighted-latency tour clears the tight near cluster first.
pub fn divergence(seed: u64) -> DivergenceFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1fe_44e1);
    let mut scene = Scene::new(cell(30.0) as usize + 1, cell(15.0) as usize + 1, RES);
    scene.name = Some(format!("divergence-{seed}"));
    add_border(&mut scene);

    // dead space below the hub keeps the map small
    add_rect(&mut scene, 0.25, 0.25, 9.75, 4.75);

    // three near rooms along the top: x in [1,4], [4,7], [7,10], doors on
    // y = 10 at the room centers
    let doors = [2.5, 5.5, 8.5];
    for x in [1.0, 4.0, 7.0, 10.0] {
        wall_v(&mut scene, x, 10.0, 14.75, None);
    }
    wall_h(&mut scene, 10.0, 0.25, 1.0, None);
    for (i, &dx) in doors.iter().enumerate() {
        let j = rng.random_range(-0.1..0.1);
        let x0 = 1.0 + i as f64 * 3.0;
        wall_h(&mut scene, 10.0, x0, x0 + 3.0, Some((dx - 0.375 + j, dx + 0.375 + j)));
    }

    // east wall with the corridor mouth; corridor to the far room
    wall_v(&mut scene, 8.0, 5.0, 6.75, None);
    wall_v(&mut scene, 8.0, 8.25, 10.0, None);
    wall_h(&mut scene, 6.5, 8.0, 24.0, None);
    wall_h(&mut scene, 8.5, 8.0, 24.0, None);
    wall_v(&mut scene, 24.0, 0.25, 6.5, None);
    wall_v(&mut scene, 24.0, 8.5, 14.75, None);

    // blanket decoys sit on the doorways
    for (i, &dx) in doors.iter().enumerate() {
        place(&mut scene, &format!("bl{i}"), "blanket", dx, 10.0, 4.0, 2.0);
    }

    // wardrobe decoys: one in the hub by the corridor mouth, then a dense
    // trail keeping the corridor frontier on top of the scores
    place(&mut scene, "wd_mouth", "wardrobe", 7.8, 7.6, 4.0, 2.0);
    let mut x = 10.0;
    let mut i = 0;
    while x < 23.5 {
        let y = if i % 2 == 0 { 7.1 } else { 7.9 };
        place(&mut scene, &format!("wd{i}"), "wardrobe", x, y, 2.5, 1.2);
        x += 2.0;
        i += 1;
    }
    place(&mut scene, "wd_far1", "wardrobe", 26.0, 4.0, 2.5, 1.5);
    place(&mut scene, "wd_far2", "wardrobe", 27.0, 11.0, 2.5, 1.5);

    // the bed hides in one of the two cluster-proximal rooms; the third
    // room and the corridor stay decoys
    let rooms = [
        Vec2::new(2.5, 13.5),
        Vec2::new(5.5, 13.5),
        Vec2::new(8.5, 13.5),
    ];
    let bed_at = rooms[rng.random_range(0..2)];
    place(&mut scene, "bed0", "bed", bed_at.x, bed_at.y, 1.8, 1.4);
    for (i, r) in rooms.iter().enumerate() {
        if (*r - bed_at).norm() > 1e-9 {
            place(&mut scene, &format!("ch{i}"), "chair", r.x, r.y, 0.8, 0.8);
        }
    }

    let spec = EpisodeSpec {
        id: format!("divergence-{seed}"),
        scene: String::new(),
        start: [4.0, 8.6],
        start_heading: 0.0,
        instruction: "find the bed".into(),
        targets: vec!["bed".into()],
        success_radius: 1.5,
        max_steps: 600,
    };
    DivergenceFixture {
        scene,
        spec,
        corridor_marker: Vec2::new(8.6, 7.5),
        near_marker: Vec2::new(5.5, 10.0),
    }
}

/// Which cue points at the correct frontier in a ranking fixture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankingCue {
    /// Boosted related object near the correct frontier; the wrong side's
    /// anchor carries a high-affinity view.
    StructCorrect,
    /// High-affinity view on the correct side; a decoy field near the
    /// wrong frontier.
    VisCorrect,
    /// Both cues agree.
    BothCorrect,
}

pub struct RankingFixture {
    pub scene: Scene,
    pub cue: RankingCue,
    /// Scripted observation poses, each becoming an anchor.
    pub probes: Vec<Pose>,
    pub sensor: SensorSpec,
    pub instruction: String,
    /// The correct frontier sits on this side (x of the corridor end).
    pub correct: Vec2,
    pub wrong: Vec2,
}

/// A T-junction: the agent has walked up the stem and peeked both ways.
/// The bed hides past the `correct` (right) end.
///
/// The cue objects exploit the split between relatedness and affinity: a
/// "slipper" is instruction-related (its field gets the gamma boost) but
/// matches the text weakly (0.3), so it moves the structural score without
/// moving the view score; a "wardrobe" matches strongly (0.65) but sits
/// right next to a probe pose, 2+ meters behind any frontier, so it loads
/// the anchor's view while its Gaussian field dies off before reaching a
/// centroid.
pub fn ranking(cue: RankingCue, seed: u64) -> RankingFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a4e_11bb);
    let mut scene = Scene::new(cell(16.0) as usize + 1, cell(12.0) as usize + 1, RES);
    scene.name = Some(format!("ranking-{seed}"));
    add_border(&mut scene);

    // stem corridor x in [7, 9], junction corridor y in [5, 7]
    wall_v(&mut scene, 7.0, 0.25, 5.0, None);
    wall_v(&mut scene, 9.0, 0.25, 5.0, None);
    wall_h(&mut scene, 5.0, 0.25, 7.0, None);
    wall_h(&mut scene, 5.0, 9.0, 15.75, None);
    wall_h(&mut scene, 7.0, 0.25, 15.75, None);

    // the bed is far down the correct (right) arm, beyond every probe
    let jitter = rng.random_range(-0.2..0.2);
    place(&mut scene, "bed0", "bed", 14.8, 6.0 + jitter, 1.6, 1.2);

    let correct = Vec2::new(13.0, 6.0);
    let wrong = Vec2::new(3.0, 6.0);

    let slip = |scene: &mut Scene, x: f64, y: f64| {
        place(scene, "slip0", "slipper", x, y, 2.0, 1.6);
    };
    let wardrobe = |scene: &mut Scene, x: f64, y: f64| {
        place(scene, "wd0", "wardrobe", x, y, 1.0, 0.8);
    };

    match cue {
        RankingCue::StructCorrect => {
            // boosted field on the right frontier; strong view on the left
            slip(&mut scene, 11.4 + jitter, 6.2);
            wardrobe(&mut scene, 6.4, 6.4);
        }
        RankingCue::VisCorrect => {
            // strong view on the right probe; boosted field near the wrong
            // frontier, one sigma out so the full score still prefers right
            wardrobe(&mut scene, 9.6, 6.4);
            slip(&mut scene, 6.2 + jitter * 0.5, 6.6);
        }
        RankingCue::BothCorrect => {
            slip(&mut scene, 11.4 + jitter, 6.2);
            wardrobe(&mut scene, 9.6, 6.4);
        }
    }

    // probes: stem (twice, covering the corner shadows), junction, right
    // peek, left peek
    let probes = vec![
        Pose::new(Vec2::new(8.0, 1.2), std::f64::consts::FRAC_PI_2),
        Pose::new(
            Vec2::new(8.0, 3.8 + rng.random_range(-0.2..0.2)),
            std::f64::consts::FRAC_PI_2,
        ),
        Pose::new(Vec2::new(8.0, 6.0), std::f64::consts::FRAC_PI_2),
        Pose::new(Vec2::new(9.2, 6.0), 0.0),
        Pose::new(Vec2::new(6.8, 6.0), std::f64::consts::PI),
    ];

    RankingFixture {
        scene,
        cue,
        probes,
        sensor: SensorSpec {
            range: 2.6,
            fov: std::f64::consts::TAU,
        },
        instruction: "find the bed".into(),
        correct,
        wrong,
    }
}

impl RankingFixture {
    /// Drive the scripted probes through the real observation and memory
    /// pipeline, producing the exploration state the scorers get judged
    /// on.
    pub fn build_state(&self, merge: &MergeConfig) -> (OccupancyGrid, CognitiveMemoryGraph) {
        let truth = self.scene.ground_truth();
        let mut grid = OccupancyGrid::new(self.scene.width, self.scene.height, self.scene.resolution);
        let mut graph = CognitiveMemoryGraph::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
        for (i, pose) in self.probes.iter().enumerate() {
            let id = AnchorId(i as u64 + 1);
            grid.integrate_observation(&truth, pose, &self.sensor, Some(id), i as u64)
                .expect("probe poses are inside the scene");
            let detections = visible_objects(&self.scene, &truth, pose, &self.sensor);
            let observed: Vec<ObservedObject> = detections
                .iter()
                .map(|d| {
                    let obj = &self.scene.objects[d.object_index];
                    ObservedObject::from_points(&obj.label, obj.sample_points(&mut rng, 24))
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
            graph
                .insert_anchor(
                    VisualAnchor {
                        id,
                        pose: *pose,
                        view,
                        timestamp: i as u64,
                        cost: 1.0,
                    },
                    observed,
                    merge,
                )
                .expect("fresh anchor ids");
        }
        (grid, graph)
    }
}
