//! Shortest Voronoi grid path and the corridor grown around it.
//!
//! The path has three segments: a breadth-first hop from the start cell onto
//! the Voronoi edge set, an A* route along the edge set, and a second
//! breadth-first hop from the edge set down to the goal. Every cell on the
//! way must keep the robot's circumscribed radius of clearance. The corridor
//! is the union of axis-aligned boxes centered on the path cells, each sized
//! by that cell's obstacle clearance, clipped to free space.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::grid_map::{CellIndex, NEIGHBORS_8};
use crate::gvd::GvdMap;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error)]
pub enum CorridorError {
    #[error("cell {0} cannot reach any Voronoi edge cell with enough clearance")]
    IsolatedCell(CellIndex),
    #[error("no Voronoi route between {0} and {1}")]
    NoVoronoiRoute(CellIndex, CellIndex),
    #[error("cell {0} is not on the Voronoi edge set")]
    NotAVoronoiCell(CellIndex),
    #[error("cell {0} is blocked or too close to obstacles")]
    BlockedCell(CellIndex),
}

/// Shortest grid path from start to goal via the Voronoi edge set.
#[derive(Debug, Clone)]
pub struct VoronoiPath {
    /// Ordered cells from the start cell to the goal cell; consecutive
    /// entries are 8-neighbors.
    pub cells: Vec<CellIndex>,
    /// Index of the first cell on the Voronoi edge segment.
    pub edge_start: usize,
    /// Index one past the last cell of the Voronoi edge segment.
    pub edge_end: usize,
}

/// Boolean membership mask over the whole grid.
#[derive(Debug, Clone)]
pub struct VoronoiCorridor {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    /// Inclusive cell bounding box (min_x, min_y, max_x, max_y) of the mask.
    bbox: (i32, i32, i32, i32),
    member_count: usize,
}

impl VoronoiCorridor {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, c: CellIndex) -> bool {
        c.ix >= 0
            && c.iy >= 0
            && (c.ix as usize) < self.width
            && (c.iy as usize) < self.height
            && self.mask[c.iy as usize * self.width + c.ix as usize]
    }

    pub fn member_count(&self) -> usize {
        self.member_count
    }

    /// Inclusive bounding box of all member cells.
    pub fn bbox(&self) -> (i32, i32, i32, i32) {
        self.bbox
    }

    pub fn iter_members(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let w = self.width;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(move |(i, _)| CellIndex::new((i % w) as i32, (i / w) as i32))
    }

    /// Corridor covering every free cell: the unrestricted search space used
    /// by the full-space baseline.
    pub fn full_free_space(gvd: &GvdMap) -> Self {
        let width = gvd.width();
        let height = gvd.height();
        let mut mask = vec![false; width * height];
        let mut count = 0;
        for iy in 0..height as i32 {
            for ix in 0..width as i32 {
                let c = CellIndex::new(ix, iy);
                if !gvd.is_obstacle(c) {
                    mask[iy as usize * width + ix as usize] = true;
                    count += 1;
                }
            }
        }
        VoronoiCorridor {
            width,
            height,
            mask,
            bbox: (0, 0, width as i32 - 1, height as i32 - 1),
            member_count: count,
        }
    }

    /// Render the mask as a portable bitmap (P1) for visual debugging.
    pub fn to_pbm(&self) -> String {
        let mut out = format!("P1\n{} {}\n", self.width, self.height);
        for iy in (0..self.height).rev() {
            for ix in 0..self.width {
                out.push(if self.mask[iy * self.width + ix] { '1' } else { '0' });
                out.push(if ix + 1 == self.width { '\n' } else { ' ' });
            }
        }
        out
    }
}

/// Nearest Voronoi edge cell reachable from `c` through cells with clearance
/// at least `r_c`, plus the breadth-first grid path to it (inclusive of both
/// endpoints).
pub fn nearest_gvd_cell(
    gvd: &GvdMap,
    c: CellIndex,
    r_c: f64,
) -> Result<(CellIndex, Vec<CellIndex>), CorridorError> {
    if gvd.is_obstacle(c) || !gvd.meets_clearance(c, r_c) {
        return Err(CorridorError::BlockedCell(c));
    }
    if gvd.is_voronoi(c) {
        return Ok((c, vec![c]));
    }
    let w = gvd.width();
    let h = gvd.height();
    let mut parent: Vec<u32> = vec![u32::MAX; w * h];
    let idx = |c: CellIndex| c.iy as usize * w + c.ix as usize;
    let mut queue = std::collections::VecDeque::new();
    parent[idx(c)] = idx(c) as u32;
    queue.push_back(c);
    while let Some(cur) = queue.pop_front() {
        for (dx, dy) in NEIGHBORS_8 {
            let n = cur.offset(dx, dy);
            if n.ix < 0 || n.iy < 0 || n.ix as usize >= w || n.iy as usize >= h {
                continue;
            }
            if parent[idx(n)] != u32::MAX {
                continue;
            }
            if gvd.is_obstacle(n) || !gvd.meets_clearance(n, r_c) {
                continue;
            }
            parent[idx(n)] = idx(cur) as u32;
            if gvd.is_voronoi(n) {
                let mut path = vec![n];
                let mut at = idx(n);
                while parent[at] != at as u32 {
                    at = parent[at] as usize;
                    path.push(CellIndex::new((at % w) as i32, (at / w) as i32));
                }
                path.reverse();
                return Ok((n, path));
            }
            queue.push_back(n);
        }
    }
    Err(CorridorError::IsolatedCell(c))
}

/// Shortest 8-connected path between two Voronoi edge cells, restricted to
/// edge cells with clearance at least `r_c`. Axis steps cost 1, diagonal
/// steps √2; the octile heuristic keeps the search admissible. Ties break on
/// lower heuristic, then cell order, for deterministic results.
pub fn voronoi_astar(
    gvd: &GvdMap,
    c1: CellIndex,
    c2: CellIndex,
    r_c: f64,
) -> Result<Vec<CellIndex>, CorridorError> {
    for &c in &[c1, c2] {
        if !gvd.is_voronoi(c) {
            return Err(CorridorError::NotAVoronoiCell(c));
        }
        if !gvd.meets_clearance(c, r_c) {
            return Err(CorridorError::BlockedCell(c));
        }
    }
    if c1 == c2 {
        return Ok(vec![c1]);
    }
    let w = gvd.width();
    let h = gvd.height();
    let idx = |c: CellIndex| c.iy as usize * w + c.ix as usize;
    let octile = |a: CellIndex, b: CellIndex| {
        let dx = (a.ix - b.ix).abs() as f64;
        let dy = (a.iy - b.iy).abs() as f64;
        dx.max(dy) + (SQRT_2 - 1.0) * dx.min(dy)
    };

    #[derive(PartialEq)]
    struct Entry {
        f: f64,
        h: f64,
        cell: u32,
    }
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.f
                .total_cmp(&other.f)
                .then(self.h.total_cmp(&other.h))
                .then(self.cell.cmp(&other.cell))
        }
    }

    let mut g = vec![f64::INFINITY; w * h];
    let mut parent = vec![u32::MAX; w * h];
    let mut closed = vec![false; w * h];
    let mut open = BinaryHeap::new();
    g[idx(c1)] = 0.0;
    open.push(Reverse(Entry {
        f: octile(c1, c2),
        h: octile(c1, c2),
        cell: idx(c1) as u32,
    }));
    while let Some(Reverse(e)) = open.pop() {
        let cu = e.cell as usize;
        if closed[cu] {
            continue;
        }
        closed[cu] = true;
        let cur = CellIndex::new((cu % w) as i32, (cu / w) as i32);
        if cur == c2 {
            let mut path = vec![cur];
            let mut at = cu;
            while parent[at] != u32::MAX {
                at = parent[at] as usize;
                path.push(CellIndex::new((at % w) as i32, (at / w) as i32));
            }
            path.reverse();
            return Ok(path);
        }
        for (dx, dy) in NEIGHBORS_8 {
            let n = cur.offset(dx, dy);
            if n.ix < 0 || n.iy < 0 || n.ix as usize >= w || n.iy as usize >= h {
                continue;
            }
            let nu = idx(n);
            if closed[nu] || !gvd.is_voronoi(n) || !gvd.meets_clearance(n, r_c) {
                continue;
            }
            let step = if dx == 0 || dy == 0 { 1.0 } else { SQRT_2 };
            let cand = g[cu] + step;
            if cand < g[nu] {
                g[nu] = cand;
                parent[nu] = cu as u32;
                let hn = octile(n, c2);
                open.push(Reverse(Entry {
                    f: cand + hn,
                    h: hn,
                    cell: nu as u32,
                }));
            }
        }
    }
    Err(CorridorError::NoVoronoiRoute(c1, c2))
}

/// Cost of an 8-connected grid path under unit/√2 step weights.
pub fn grid_path_cost(cells: &[CellIndex]) -> f64 {
    cells
        .windows(2)
        .map(|w| {
            if w[0].ix == w[1].ix || w[0].iy == w[1].iy {
                1.0
            } else {
                SQRT_2
            }
        })
        .sum()
}

/// Full Voronoi path: breadth-first onto the edge set, A* along it, and
/// breadth-first off it to the goal.
pub fn find_voronoi_path(
    gvd: &GvdMap,
    start: CellIndex,
    goal: CellIndex,
    r_c: f64,
) -> Result<VoronoiPath, CorridorError> {
    let (c1, l1) = nearest_gvd_cell(gvd, start, r_c)?;
    let (c2, l2_rev) = nearest_gvd_cell(gvd, goal, r_c)?;
    let l3 = voronoi_astar(gvd, c1, c2, r_c)?;

    let mut cells = l1;
    let edge_start = cells.len() - 1; // c1 is both the end of L1 and start of L3
    cells.extend_from_slice(&l3[1..]);
    let edge_end = cells.len();
    let mut l2 = l2_rev;
    l2.reverse(); // BFS path ran goal -> c2; the corridor path needs c2 -> goal
    cells.extend_from_slice(&l2[1..]);

    Ok(VoronoiPath {
        cells,
        edge_start,
        edge_end,
    })
}

/// Grow the corridor: for each path cell, an axis-aligned box with side twice
/// the cell's obstacle clearance (Chebyshev radius `round(d_k / resolution)`)
/// is stamped around it; free cells covered by any box are members.
pub fn build_corridor(gvd: &GvdMap, path: &VoronoiPath) -> VoronoiCorridor {
    let w = gvd.width();
    let h = gvd.height();
    let mut mask = vec![false; w * h];
    let mut count = 0usize;
    let mut bbox = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for &ck in &path.cells {
        let d_k = gvd.clearance_at(ck);
        let radius = if d_k.is_infinite() {
            w.max(h) as i32
        } else {
            (d_k / gvd.resolution()).round() as i32
        };
        let x0 = (ck.ix - radius).max(0);
        let x1 = (ck.ix + radius).min(w as i32 - 1);
        let y0 = (ck.iy - radius).max(0);
        let y1 = (ck.iy + radius).min(h as i32 - 1);
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                let c = CellIndex::new(ix, iy);
                let i = iy as usize * w + ix as usize;
                if !mask[i] && !gvd.is_obstacle(c) {
                    mask[i] = true;
                    count += 1;
                    bbox.0 = bbox.0.min(ix);
                    bbox.1 = bbox.1.min(iy);
                    bbox.2 = bbox.2.max(ix);
                    bbox.3 = bbox.3.max(iy);
                }
            }
        }
    }
    VoronoiCorridor {
        width: w,
        height: h,
        mask,
        bbox,
        member_count: count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_map::{CellState, OccupancyGrid, UnknownPolicy};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Two obstacle walls at ix=0 and ix=10 put the Voronoi band at ix=5.
    fn corridor_map() -> GvdMap {
        let mut grid = OccupancyGrid::filled(11, 10, 0.1, (0.0, 0.0), CellState::Free);
        for iy in 0..10 {
            grid.set_state(CellIndex::new(0, iy), CellState::Occupied);
            grid.set_state(CellIndex::new(10, iy), CellState::Occupied);
        }
        GvdMap::build(&grid, UnknownPolicy::Obstacle)
    }

    #[test]
    fn nearest_gvd_cell_trivial_when_already_on_edge() {
        let gvd = corridor_map();
        let c = CellIndex::new(5, 4);
        assert!(gvd.is_voronoi(c));
        let (found, path) = nearest_gvd_cell(&gvd, c, 0.1).unwrap();
        assert_eq!(found, c);
        assert_eq!(path, vec![c]);
    }

    #[test]
    fn nearest_gvd_cell_straight_run() {
        let gvd = corridor_map();
        let c = CellIndex::new(2, 4);
        let (found, path) = nearest_gvd_cell(&gvd, c, 0.1).unwrap();
        assert_eq!(found.ix, 5);
        assert_eq!(path.len(), 4);
        assert_eq!(path[0], c);
        assert_eq!(*path.last().unwrap(), found);
        for w in path.windows(2) {
            assert!((w[0].ix - w[1].ix).abs() <= 1 && (w[0].iy - w[1].iy).abs() <= 1);
        }
    }

    #[test]
    fn nearest_gvd_cell_attains_minimum_bfs_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut grid = OccupancyGrid::filled(40, 40, 0.1, (0.0, 0.0), CellState::Free);
        for _ in 0..60 {
            let c = CellIndex::new(rng.gen_range(0..40), rng.gen_range(0..40));
            grid.set_state(c, CellState::Occupied);
        }
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        let r_c = 0.1;
        // Exhaustive BFS-distance scan oracle over all valid cells.
        let bfs_dist = |from: CellIndex| -> Vec<u32> {
            let mut dist = vec![u32::MAX; 40 * 40];
            if gvd.is_obstacle(from) || !gvd.meets_clearance(from, r_c) {
                return dist;
            }
            let mut q = std::collections::VecDeque::new();
            dist[from.iy as usize * 40 + from.ix as usize] = 0;
            q.push_back(from);
            while let Some(cur) = q.pop_front() {
                let d = dist[cur.iy as usize * 40 + cur.ix as usize];
                for (dx, dy) in NEIGHBORS_8 {
                    let n = cur.offset(dx, dy);
                    if n.ix < 0 || n.iy < 0 || n.ix >= 40 || n.iy >= 40 {
                        continue;
                    }
                    let i = n.iy as usize * 40 + n.ix as usize;
                    if dist[i] != u32::MAX || gvd.is_obstacle(n) || !gvd.meets_clearance(n, r_c) {
                        continue;
                    }
                    dist[i] = d + 1;
                    q.push_back(n);
                }
            }
            dist
        };
        let mut checked = 0;
        for iy in (0..40).step_by(7) {
            for ix in (0..40).step_by(7) {
                let c = CellIndex::new(ix, iy);
                if gvd.is_obstacle(c) || !gvd.meets_clearance(c, r_c) || gvd.is_voronoi(c) {
                    continue;
                }
                let dist = bfs_dist(c);
                let best = (0..40 * 40)
                    .filter(|&i| {
                        gvd.is_voronoi(CellIndex::new((i % 40) as i32, (i / 40) as i32))
                    })
                    .map(|i| dist[i])
                    .min()
                    .unwrap_or(u32::MAX);
                match nearest_gvd_cell(&gvd, c, r_c) {
                    Ok((found, path)) => {
                        let i = found.iy as usize * 40 + found.ix as usize;
                        assert_eq!(dist[i], best, "suboptimal voronoi cell from {c}");
                        assert_eq!(path.len() as u32, best + 1);
                        checked += 1;
                    }
                    Err(_) => assert_eq!(best, u32::MAX),
                }
            }
        }
        assert!(checked > 5, "oracle exercised too few cells");
    }

    #[test]
    fn isolated_cell_error() {
        // A single obstacle has a single basin: no Voronoi edge exists, so
        // the breadth-first search exhausts without finding one.
        let mut grid = OccupancyGrid::filled(9, 9, 0.1, (0.0, 0.0), CellState::Free);
        grid.set_state(CellIndex::new(0, 0), CellState::Occupied);
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        let r = nearest_gvd_cell(&gvd, CellIndex::new(5, 5), 0.1);
        assert!(matches!(r, Err(CorridorError::IsolatedCell(_))));
    }

    #[test]
    fn astar_single_cell() {
        let gvd = corridor_map();
        let c = CellIndex::new(5, 3);
        let path = voronoi_astar(&gvd, c, c, 0.1).unwrap();
        assert_eq!(path, vec![c]);
        assert_eq!(grid_path_cost(&path), 0.0);
    }

    #[test]
    fn astar_straight_band() {
        let gvd = corridor_map();
        let path = voronoi_astar(&gvd, CellIndex::new(5, 0), CellIndex::new(5, 9), 0.1).unwrap();
        assert_eq!(path.len(), 10);
        assert!((grid_path_cost(&path) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn astar_loop_takes_cheaper_route() {
        // Synthetic ring-shaped Voronoi set on an 11x11 map; route cost
        // around either side of the ring is 8 + 2√2, enumerated by hand:
        // two straight runs of 2 and 6 cells plus two diagonal corner cuts.
        let w = 11;
        let mut voronoi = vec![false; w * w];
        let mut set = |x: usize, y: usize| voronoi[y * w + x] = true;
        for x in 2..=8 {
            set(x, 2);
            set(x, 8);
        }
        for y in 2..=8 {
            set(2, y);
            set(8, y);
        }
        let gvd = GvdMap::from_parts(w, w, 0.1, vec![100; w * w], voronoi);
        let path = voronoi_astar(&gvd, CellIndex::new(2, 5), CellIndex::new(8, 5), 0.1).unwrap();
        let expected = 8.0 + 2.0 * SQRT_2;
        assert!((grid_path_cost(&path) - expected).abs() < 1e-9);

        // Independent exhaustive shortest path over the voronoi subgraph.
        let oracle = {
            let mut dist = vec![f64::INFINITY; w * w];
            dist[5 * w + 2] = 0.0;
            // Bellman-Ford style relaxation: no heap, no heuristic.
            for _ in 0..w * w {
                let mut changed = false;
                for i in 0..w * w {
                    if dist[i].is_infinite() {
                        continue;
                    }
                    let c = CellIndex::new((i % w) as i32, (i / w) as i32);
                    for (dx, dy) in NEIGHBORS_8 {
                        let n = c.offset(dx, dy);
                        if n.ix < 0 || n.iy < 0 || n.ix >= w as i32 || n.iy >= w as i32 {
                            continue;
                        }
                        if !gvd.is_voronoi(n) {
                            continue;
                        }
                        let step = if dx == 0 || dy == 0 { 1.0 } else { SQRT_2 };
                        let j = n.iy as usize * w + n.ix as usize;
                        if dist[i] + step < dist[j] {
                            dist[j] = dist[i] + step;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            dist[5 * w + 8]
        };
        assert!((grid_path_cost(&path) - oracle).abs() < 1e-9);
    }

    #[test]
    fn astar_optimal_on_random_map_gvd() {
        // Cost must match an exhaustive shortest-path scan over the
        // Voronoi-edge subgraph of a real map.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut grid = OccupancyGrid::filled(60, 60, 0.1, (0.0, 0.0), CellState::Free);
        for _ in 0..80 {
            let c = CellIndex::new(rng.gen_range(0..60), rng.gen_range(0..60));
            grid.set_state(c, CellState::Occupied);
        }
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        let voronoi: Vec<CellIndex> = (0..60 * 60)
            .map(|i| CellIndex::new(i % 60, i / 60))
            .filter(|&c| gvd.is_voronoi(c) && gvd.meets_clearance(c, 0.1))
            .collect();
        assert!(voronoi.len() > 10, "fixture lacks a voronoi set");
        let c1 = voronoi[0];
        // Exhaustive Dijkstra without a heap or heuristic.
        let dist = {
            let mut dist = vec![f64::INFINITY; 60 * 60];
            let mut done = vec![false; 60 * 60];
            dist[(c1.iy * 60 + c1.ix) as usize] = 0.0;
            loop {
                let mut best = usize::MAX;
                let mut bd = f64::INFINITY;
                for i in 0..60 * 60 {
                    if !done[i] && dist[i] < bd {
                        bd = dist[i];
                        best = i;
                    }
                }
                if best == usize::MAX {
                    break;
                }
                done[best] = true;
                let c = CellIndex::new((best % 60) as i32, (best / 60) as i32);
                for (dx, dy) in NEIGHBORS_8 {
                    let n = c.offset(dx, dy);
                    if n.ix < 0 || n.iy < 0 || n.ix >= 60 || n.iy >= 60 {
                        continue;
                    }
                    if !gvd.is_voronoi(n) || !gvd.meets_clearance(n, 0.1) {
                        continue;
                    }
                    let step = if dx == 0 || dy == 0 { 1.0 } else { SQRT_2 };
                    let j = (n.iy * 60 + n.ix) as usize;
                    if dist[best] + step < dist[j] {
                        dist[j] = dist[best] + step;
                    }
                }
            }
            dist
        };
        let mut compared = 0;
        for &c2 in voronoi.iter().step_by(9) {
            let want = dist[(c2.iy * 60 + c2.ix) as usize];
            match voronoi_astar(&gvd, c1, c2, 0.1) {
                Ok(path) => {
                    assert!(
                        (grid_path_cost(&path) - want).abs() < 1e-9,
                        "suboptimal route to {c2}: {} vs {want}",
                        grid_path_cost(&path)
                    );
                    compared += 1;
                }
                Err(_) => assert!(want.is_infinite(), "missed route to {c2}"),
            }
        }
        assert!(compared > 3);
    }

    #[test]
    fn astar_disconnected_components_error() {
        let w = 9;
        let mut voronoi = vec![false; w * w];
        voronoi[w + 1] = true; // (1,1)
        voronoi[7 * w + 7] = true; // (7,7), not reachable
        let gvd = GvdMap::from_parts(w, w, 0.1, vec![100; w * w], voronoi);
        let r = voronoi_astar(&gvd, CellIndex::new(1, 1), CellIndex::new(7, 7), 0.1);
        assert!(matches!(r, Err(CorridorError::NoVoronoiRoute(_, _))));
    }

    #[test]
    fn corridor_single_cell_box() {
        // One path cell with clearance 3 cells: members are the free cells
        // of the 7x7 Chebyshev box around it.
        let w = 15;
        let mut sq = vec![SQ_DIST_INF_TEST; w * w];
        let center = 7 * w + 7;
        sq[center] = 9; // 3 cells * 0.1 m/cell = 0.3 m clearance
        let mut voronoi = vec![false; w * w];
        voronoi[center] = true;
        let gvd = GvdMap::from_parts(w, w, 0.1, sq, voronoi);
        let path = VoronoiPath {
            cells: vec![CellIndex::new(7, 7)],
            edge_start: 0,
            edge_end: 1,
        };
        let corridor = build_corridor(&gvd, &path);
        assert_eq!(corridor.member_count(), 49);
        assert!(corridor.contains(CellIndex::new(4, 4)));
        assert!(corridor.contains(CellIndex::new(10, 10)));
        assert!(!corridor.contains(CellIndex::new(3, 7)));
    }

    const SQ_DIST_INF_TEST: u32 = 400; // clearance 2 m on a 0.1 m grid

    #[test]
    fn corridor_union_no_double_count() {
        let w = 15;
        let mut sq = vec![SQ_DIST_INF_TEST; w * w];
        sq[7 * w + 7] = 4;
        sq[7 * w + 8] = 4;
        let gvd = GvdMap::from_parts(w, w, 0.1, sq, vec![false; w * w]);
        let path = VoronoiPath {
            cells: vec![CellIndex::new(7, 7), CellIndex::new(8, 7)],
            edge_start: 0,
            edge_end: 2,
        };
        let corridor = build_corridor(&gvd, &path);
        // Two overlapping 5x5 boxes: 25 + 25 - 20 shared = 30 members.
        assert_eq!(corridor.member_count(), 30);
    }

    #[test]
    fn full_pipeline_containment_and_monotonicity() {
        let mut grid = OccupancyGrid::filled(40, 30, 0.1, (0.0, 0.0), CellState::Free);
        for iy in 0..30 {
            grid.set_state(CellIndex::new(0, iy), CellState::Occupied);
            grid.set_state(CellIndex::new(39, iy), CellState::Occupied);
        }
        for ix in 0..40 {
            grid.set_state(CellIndex::new(ix, 0), CellState::Occupied);
            grid.set_state(CellIndex::new(ix, 29), CellState::Occupied);
        }
        for iy in 10..20 {
            for ix in 15..25 {
                grid.set_state(CellIndex::new(ix, iy), CellState::Occupied);
            }
        }
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        let r_c = 0.15;
        let start = CellIndex::new(5, 15);
        let goal = CellIndex::new(34, 15);
        let path = find_voronoi_path(&gvd, start, goal, r_c).unwrap();
        assert_eq!(path.cells[0], start);
        assert_eq!(*path.cells.last().unwrap(), goal);
        for w in path.cells.windows(2) {
            assert!(
                (w[0].ix - w[1].ix).abs() <= 1 && (w[0].iy - w[1].iy).abs() <= 1 && w[0] != w[1]
            );
        }
        for &c in &path.cells {
            assert!(gvd.meets_clearance(c, r_c), "path cell {c} too close");
            assert!(!gvd.is_obstacle(c));
        }
        for &c in &path.cells[path.edge_start..path.edge_end] {
            assert!(gvd.is_voronoi(c), "edge segment cell {c} off the GVD");
        }
        let corridor = build_corridor(&gvd, &path);
        for &c in &path.cells {
            assert!(corridor.contains(c));
        }
        let mut free = 0;
        for iy in 0..30 {
            for ix in 0..40 {
                let c = CellIndex::new(ix, iy);
                if corridor.contains(c) {
                    assert!(!gvd.is_obstacle(c), "corridor covers obstacle {c}");
                }
                if !gvd.is_obstacle(c) {
                    free += 1;
                }
            }
        }
        assert!(corridor.member_count() < free, "corridor should shrink the space");

        // Monotonicity: growing every box keeps all previous members. A
        // second map with uniformly larger clearances simulates larger d_k.
        let mut sq2 = Vec::with_capacity(40 * 30);
        for iy in 0..30 {
            for ix in 0..40 {
                sq2.push(gvd.sq_dist(CellIndex::new(ix, iy)).saturating_mul(4));
            }
        }
        let voronoi2 = (0..40 * 30)
            .map(|i| {
                let c = CellIndex::new(i % 40, i / 40);
                gvd.is_voronoi(c)
            })
            .collect();
        let gvd2 = GvdMap::from_parts(40, 30, 0.1, sq2, voronoi2);
        let corridor2 = build_corridor(&gvd2, &path);
        for c in corridor.iter_members() {
            assert!(
                corridor2.contains(c) || gvd2.is_obstacle(c),
                "bigger boxes dropped member {c}"
            );
        }
    }
}
