//! Frontier extraction: maximal 8-connected clusters of Free cells that
//! border Unknown space, each with a centroid, a safe viewpoint, and the
//! openness measure consumed by goal selection.

use crate::geom::{Pose, Vec2};
use crate::memory::AnchorId;

use super::{Cell, CellIdx, OccupancyGrid};

/// A candidate exploration region.
#[derive(Clone, Debug)]
pub struct Frontier {
    /// Member boundary cells: Free with a 4-adjacent Unknown cell.
    pub cells: Vec<CellIdx>,
    /// Mean of member cell centers.
    pub centroid: Vec2,
    /// Pose to observe the region from: the safe Free cell nearest the
    /// centroid, heading toward the centroid.
    pub viewpoint: Pose,
    /// Anchor whose observation most recently converted one of the member
    /// cells; feeds the out-of-boundary visual score.
    pub anchor_id: Option<AnchorId>,
    /// Openness h in meters, in [0, h_max].
    pub openness: f64,
}

const NEIGHBORS_4: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const NEIGHBORS_8: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

fn is_frontier_cell(grid: &OccupancyGrid, c: CellIdx) -> bool {
    if grid.get(c) != Cell::Free {
        return false;
    }
    NEIGHBORS_4.iter().any(|&(dx, dy)| {
        let n = CellIdx::new(c.x + dx, c.y + dy);
        grid.in_bounds(n) && grid.get(n) == Cell::Unknown
    })
}

/// Extract all frontiers, ordered by (centroid.y, centroid.x).
///
/// Frontier cells are Free cells 4-adjacent to an in-bounds Unknown cell;
/// clusters are their maximal 8-connected components. The map border does
/// not count as Unknown. Openness is computed by `raycast_openness` from
/// the chosen viewpoint.
pub fn extract_frontiers(grid: &OccupancyGrid, robot_radius: f64, h_max: f64) -> Vec<Frontier> {
    let w = grid.width() as i32;
    let h = grid.height() as i32;

    let mut mask = vec![false; (w * h) as usize];
    let at = |c: CellIdx| (c.y * w + c.x) as usize;
    for y in 0..h {
        for x in 0..w {
            let c = CellIdx::new(x, y);
            mask[at(c)] = is_frontier_cell(grid, c);
        }
    }

    // Cells too close to an obstacle are not valid viewpoints.
    let unsafe_mask = dilate_occupied(grid, robot_radius);

    let mut visited = vec![false; mask.len()];
    let mut clusters: Vec<Vec<CellIdx>> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let c = CellIdx::new(x, y);
            if !mask[at(c)] || visited[at(c)] {
                continue;
            }
            let mut cluster = Vec::new();
            let mut queue = vec![c];
            visited[at(c)] = true;
            while let Some(cur) = queue.pop() {
                cluster.push(cur);
                for &(dx, dy) in &NEIGHBORS_8 {
                    let n = CellIdx::new(cur.x + dx, cur.y + dy);
                    if n.x >= 0 && n.y >= 0 && n.x < w && n.y < h && mask[at(n)] && !visited[at(n)]
                    {
                        visited[at(n)] = true;
                        queue.push(n);
                    }
                }
            }
            cluster.sort();
            clusters.push(cluster);
        }
    }

    let mut frontiers: Vec<Frontier> = clusters
        .into_iter()
        .map(|cells| {
            let mut centroid = Vec2::ZERO;
            for &c in &cells {
                centroid += grid.center_of(c);
            }
            centroid = centroid / cells.len() as f64;

            let vp_cell = find_viewpoint(grid, &unsafe_mask, centroid, &cells);
            let vp_pos = grid.center_of(vp_cell);
            let heading = match (centroid - vp_pos).normalized() {
                Some(d) => d.angle(),
                None => 0.0,
            };
            let viewpoint = Pose::new(vp_pos, heading);

            let anchor_id = cells
                .iter()
                .filter_map(|&c| grid.conversion(c))
                .filter(|conv| conv.anchor.is_some())
                .max_by_key(|conv| conv.stamp)
                .and_then(|conv| conv.anchor);

            let openness = grid.raycast_openness(vp_pos, centroid, h_max);

            Frontier {
                cells,
                centroid,
                viewpoint,
                anchor_id,
                openness,
            }
        })
        .collect();

    frontiers.sort_by(|a, b| {
        (a.centroid.y, a.centroid.x)
            .partial_cmp(&(b.centroid.y, b.centroid.x))
            .unwrap()
    });
    frontiers
}

/// Cells whose center lies within `robot_radius` of an Occupied cell center.
fn dilate_occupied(grid: &OccupancyGrid, robot_radius: f64) -> Vec<bool> {
    let w = grid.width() as i32;
    let h = grid.height() as i32;
    let mut out = vec![false; (w * h) as usize];
    if robot_radius <= 0.0 {
        return out;
    }
    let r_cells = (robot_radius / grid.resolution()).ceil() as i32;
    for y in 0..h {
        for x in 0..w {
            let c = CellIdx::new(x, y);
            if grid.get(c) != Cell::Occupied {
                continue;
            }
            let cc = grid.center_of(c);
            for dy in -r_cells..=r_cells {
                for dx in -r_cells..=r_cells {
                    let n = CellIdx::new(x + dx, y + dy);
                    if n.x < 0 || n.y < 0 || n.x >= w || n.y >= h {
                        continue;
                    }
                    if grid.center_of(n).dist(cc) <= robot_radius + 1e-9 {
                        out[(n.y * w + n.x) as usize] = true;
                    }
                }
            }
        }
    }
    out
}

/// Meters a viewpoint may sit from its cluster; a viewpoint must be able
/// to observe the boundary it belongs to. Without this bound a closed
/// frontier ring around the agent would claim the agent's own cell (the
/// ring centroid) as its viewpoint.
const VIEWPOINT_REACH: f64 = 1.5;

/// Free cell nearest the centroid, restricted to the cluster's vicinity,
/// with obstacle clearance; falls back to the nearest unsafe Free cell and
/// finally to the nearest member cell.
fn find_viewpoint(
    grid: &OccupancyGrid,
    unsafe_mask: &[bool],
    centroid: Vec2,
    cells: &[CellIdx],
) -> CellIdx {
    let w = grid.width() as i32;
    let h = grid.height() as i32;
    let origin = grid.cell_of(centroid);
    let origin = CellIdx::new(origin.x.clamp(0, w - 1), origin.y.clamp(0, h - 1));

    let reach_cells = (VIEWPOINT_REACH / grid.resolution()).ceil() as i32;
    let mut near_cluster: std::collections::HashSet<CellIdx> = Default::default();
    for &m in cells {
        let mc = grid.center_of(m);
        for dy in -reach_cells..=reach_cells {
            for dx in -reach_cells..=reach_cells {
                let c = CellIdx::new(m.x + dx, m.y + dy);
                if c.x >= 0
                    && c.y >= 0
                    && c.x < w
                    && c.y < h
                    && grid.center_of(c).dist(mc) <= VIEWPOINT_REACH + 1e-9
                {
                    near_cluster.insert(c);
                }
            }
        }
    }

    let mut best: Option<(f64, CellIdx)> = None;
    let mut best_unsafe: Option<(f64, CellIdx)> = None;
    let max_ring = w.max(h) as usize;
    for ring in 0..max_ring {
        // Once a safe cell is found, rings farther than the best distance
        // cannot improve it.
        if let Some((d, _)) = best {
            if (ring as f64 - 1.0) * grid.resolution() > d {
                break;
            }
        }
        for (c, dist) in ring_cells(grid, origin, ring, centroid) {
            if grid.get(c) != Cell::Free || !near_cluster.contains(&c) {
                continue;
            }
            let safe = !unsafe_mask[(c.y * w + c.x) as usize];
            let slot = if safe { &mut best } else { &mut best_unsafe };
            let better = match slot {
                Some((bd, bc)) => dist < *bd - 1e-12 || (dist < *bd + 1e-12 && c < *bc),
                None => true,
            };
            if better {
                *slot = Some((dist, c));
            }
        }
    }
    if let Some((_, c)) = best {
        return c;
    }
    if let Some((_, c)) = best_unsafe {
        return c;
    }
    // Member cells are Free by construction, so this is only a formal fallback.
    *cells
        .iter()
        .min_by(|a, b| {
            grid.center_of(**a)
                .dist(centroid)
                .partial_cmp(&grid.center_of(**b).dist(centroid))
                .unwrap()
        })
        .expect("frontier cluster is non-empty")
}

fn ring_cells<'a>(
    grid: &'a OccupancyGrid,
    origin: CellIdx,
    ring: usize,
    centroid: Vec2,
) -> Vec<(CellIdx, f64)> {
    let r = ring as i32;
    let mut out = Vec::new();
    let mut push = |c: CellIdx| {
        if grid.in_bounds(c) {
            out.push((c, grid.center_of(c).dist(centroid)));
        }
    };
    if r == 0 {
        push(origin);
        return out;
    }
    for dx in -r..=r {
        push(CellIdx::new(origin.x + dx, origin.y - r));
        push(CellIdx::new(origin.x + dx, origin.y + r));
    }
    for dy in (-r + 1)..r {
        push(CellIdx::new(origin.x - r, origin.y + dy));
        push(CellIdx::new(origin.x + r, origin.y + dy));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from_rows(rows: &[&str], res: f64) -> OccupancyGrid {
        // '.' Free, '#' Occupied, '?' Unknown; row 0 is y = 0.
        let h = rows.len();
        let w = rows[0].len();
        let mut g = OccupancyGrid::new(w, h, res);
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                let c = CellIdx::new(x as i32, y as i32);
                match ch {
                    '.' => g.set(c, Cell::Free),
                    '#' => g.set(c, Cell::Occupied),
                    '?' => {}
                    other => panic!("bad cell char {other}"),
                }
            }
        }
        g
    }

    /// Brute-force frontier labeling: per-cell predicate plus union-find
    /// over 8-neighbors. Kept independent of the production clustering.
    fn brute_force_clusters(grid: &OccupancyGrid) -> Vec<Vec<CellIdx>> {
        let w = grid.width() as i32;
        let h = grid.height() as i32;
        let mut parent: Vec<usize> = (0..(w * h) as usize).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        let is_f = |c: CellIdx| {
            grid.get(c) == Cell::Free
                && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(dx, dy)| {
                    let n = CellIdx::new(c.x + dx, c.y + dy);
                    grid.in_bounds(n) && grid.get(n) == Cell::Unknown
                })
        };
        for y in 0..h {
            for x in 0..w {
                let c = CellIdx::new(x, y);
                if !is_f(c) {
                    continue;
                }
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let n = CellIdx::new(x + dx, y + dy);
                        if grid.in_bounds(n) && is_f(n) {
                            let (a, b) = (
                                find(&mut parent, (y * w + x) as usize),
                                find(&mut parent, (n.y * w + n.x) as usize),
                            );
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<CellIdx>> = Default::default();
        for y in 0..h {
            for x in 0..w {
                let c = CellIdx::new(x, y);
                if is_f(c) {
                    let root = find(&mut parent, (y * w + x) as usize);
                    groups.entry(root).or_default().push(c);
                }
            }
        }
        groups.into_values().collect()
    }

    #[test]
    fn single_free_cell_in_unknown_sea() {
        let mut grid = OccupancyGrid::new(9, 9, 1.0);
        grid.set(CellIdx::new(4, 4), Cell::Free);
        let fs = extract_frontiers(&grid, 0.0, 5.0);
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].cells, vec![CellIdx::new(4, 4)]);
    }

    #[test]
    fn fully_explored_grid_has_no_frontiers() {
        let grid = grid_from_rows(&["....", ".##.", "...."], 1.0);
        assert!(extract_frontiers(&grid, 0.0, 5.0).is_empty());
    }

    #[test]
    fn wall_splits_two_unknown_pockets() {
        // Explored corridor through the middle; unknown pockets left and
        // right of a full-height wall column each produce one frontier.
        let rows = [
            "??#??", //
            "?.#.?", //
            "?.#.?", //
            "?.#.?", //
            "??#??",
        ];
        let grid = grid_from_rows(&rows, 1.0);
        let fs = extract_frontiers(&grid, 0.0, 5.0);
        let brute = brute_force_clusters(&grid);
        assert_eq!(fs.len(), 2);
        assert_eq!(fs.len(), brute.len());
        let mut got: Vec<Vec<CellIdx>> = fs.iter().map(|f| f.cells.clone()).collect();
        let mut want = brute;
        got.sort();
        want.iter_mut().for_each(|c| c.sort());
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn soundness_and_completeness_against_exhaustive_scan() {
        // Randomized grids <= 64x64: a cell is in some frontier iff it is
        // Free with a 4-adjacent Unknown cell.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let w = rng.random_range(3..=64);
            let h = rng.random_range(3..=64);
            let mut grid = OccupancyGrid::new(w, h, 0.5);
            for y in 0..h as i32 {
                for x in 0..w as i32 {
                    let v = match rng.random_range(0..3) {
                        0 => Cell::Free,
                        1 => Cell::Occupied,
                        _ => Cell::Unknown,
                    };
                    grid.set(CellIdx::new(x, y), v);
                }
            }
            let fs = extract_frontiers(&grid, 0.0, 5.0);
            let mut in_frontier = std::collections::BTreeSet::new();
            for f in &fs {
                for &c in &f.cells {
                    assert!(in_frontier.insert(c), "cell in two frontiers");
                }
            }
            for (c, _) in grid.iter_cells() {
                assert_eq!(in_frontier.contains(&c), is_frontier_cell(&grid, c));
            }
        }
    }

    #[test]
    fn ordering_is_by_centroid_row_then_col() {
        let rows = [
            "?.?", //
            "...", //
            "?.?",
        ];
        let grid = grid_from_rows(&rows, 1.0);
        let fs = extract_frontiers(&grid, 0.0, 5.0);
        for pair in fs.windows(2) {
            let a = (pair[0].centroid.y, pair[0].centroid.x);
            let b = (pair[1].centroid.y, pair[1].centroid.x);
            assert!(a <= b);
        }
    }

    fn min_wall_dist(grid: &OccupancyGrid, p: Vec2) -> f64 {
        let mut min_d = f64::INFINITY;
        for (c, v) in grid.iter_cells() {
            if v == Cell::Occupied {
                min_d = min_d.min(grid.center_of(c).dist(p));
            }
        }
        min_d
    }

    #[test]
    fn viewpoint_keeps_clearance_from_walls() {
        let rows = [
            "#######", //
            "#.....?", //
            "#.....?", //
            "#.....?", //
            "#######",
        ];
        let grid = grid_from_rows(&rows, 1.0);
        let fs = extract_frontiers(&grid, 1.2, 5.0);
        assert_eq!(fs.len(), 1);
        assert!(min_wall_dist(&grid, fs[0].viewpoint.position) > 1.2);
        // heading faces the centroid
        let to_centroid = fs[0].centroid - fs[0].viewpoint.position;
        if to_centroid.norm() > 1e-9 {
            assert!(
                crate::geom::angle_diff(fs[0].viewpoint.heading, to_centroid.angle()) < 1e-9
            );
        }
    }

    #[test]
    fn viewpoint_falls_back_when_no_safe_cell_exists() {
        // Corridor one cell wide: every Free cell violates the clearance,
        // so the nearest Free cell is used anyway.
        let rows = [
            "#####", //
            "#...?", //
            "#####",
        ];
        let grid = grid_from_rows(&rows, 1.2);
        let fs = extract_frontiers(&grid, 1.2, 5.0);
        assert_eq!(fs.len(), 1);
        assert_eq!(grid.get(grid.cell_of(fs[0].viewpoint.position)), Cell::Free);
    }
}
