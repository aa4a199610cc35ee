//! Grid-based generalized Voronoi diagram: exact integer squared distances to
//! the nearest obstacle cell, nearest-obstacle ids, and Voronoi edge flags,
//! maintained incrementally under obstacle insertion and removal.
//!
//! Distances propagate with a dynamic-brushfire wavefront: a priority queue
//! keyed by squared distance expands lower waves from obstacle cells and
//! raise waves from removed ones, over the 8-connected neighborhood. Each
//! cell stores the id of its nearest obstacle so candidate distances are
//! always exact integer squared cell distances, never accumulated step sums.
//! Ties between equidistant obstacles resolve to the smaller cell id, which
//! keeps incremental updates and from-scratch builds cell-identical.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::grid_map::{CellIndex, OccupancyGrid, UnknownPolicy, NEIGHBORS_8};

/// Squared-distance sentinel for "no obstacle anywhere".
pub const SQ_DIST_INF: u32 = u32::MAX;

const NO_SITE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum GvdError {
    #[error("delta references out-of-bounds cell {0}")]
    DeltaOutOfBounds(CellIndex),
    #[error("delta occupies and frees the same cell {0}")]
    DeltaOverlap(CellIndex),
}

/// A batch of occupancy changes to apply to a [`GvdMap`].
#[derive(Debug, Clone, Default)]
pub struct MapDelta {
    pub newly_occupied: Vec<CellIndex>,
    pub newly_freed: Vec<CellIndex>,
}

/// Distance map plus Voronoi edge set for one occupancy grid.
#[derive(Debug, Clone)]
pub struct GvdMap {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    sq_dist: Vec<u32>,
    site: Vec<u32>,
    voronoi: Vec<bool>,
    occupied: Vec<bool>,
    to_raise: Vec<bool>,
    queue: BinaryHeap<Reverse<(u32, u32)>>,
    changed: Vec<u32>,
    dirty: Vec<bool>,
}

impl GvdMap {
    /// Build the GVD from scratch. Cells that are not traversable under
    /// `policy` count as obstacles.
    pub fn build(grid: &OccupancyGrid, policy: UnknownPolicy) -> Self {
        let width = grid.width();
        let height = grid.height();
        let n = width * height;
        let mut map = GvdMap {
            width,
            height,
            resolution: grid.resolution(),
            origin: grid.origin(),
            sq_dist: vec![SQ_DIST_INF; n],
            site: vec![NO_SITE; n],
            voronoi: vec![false; n],
            occupied: vec![false; n],
            to_raise: vec![false; n],
            queue: BinaryHeap::new(),
            changed: Vec::new(),
            dirty: vec![false; n],
        };
        for iy in 0..height as i32 {
            for ix in 0..width as i32 {
                let c = CellIndex::new(ix, iy);
                if !grid.is_traversable(c, policy) {
                    map.set_obstacle(map.pack(c));
                }
            }
        }
        map.propagate();
        map.changed.clear();
        for i in 0..n {
            map.dirty[i] = false;
            map.voronoi[i] = map.voronoi_criterion(i as u32);
        }
        map
    }

    /// Apply a batch of occupancy changes, repairing distances and Voronoi
    /// flags only where the wavefronts reach. The result matches a
    /// from-scratch build on the mutated grid.
    pub fn apply_delta(&mut self, delta: &MapDelta) -> Result<(), GvdError> {
        for &c in delta.newly_occupied.iter().chain(&delta.newly_freed) {
            if !self.in_bounds(c) {
                return Err(GvdError::DeltaOutOfBounds(c));
            }
        }
        for &c in &delta.newly_occupied {
            if delta.newly_freed.contains(&c) {
                return Err(GvdError::DeltaOverlap(c));
            }
        }
        for &c in &delta.newly_occupied {
            let i = self.pack(c);
            if !self.occupied[i as usize] {
                self.set_obstacle(i);
            }
        }
        for &c in &delta.newly_freed {
            let i = self.pack(c);
            if self.occupied[i as usize] {
                self.remove_obstacle(i);
            }
        }
        self.propagate();
        self.refresh_voronoi_flags();
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// World coordinates of the corner of cell (0, 0), mirrored from the
    /// source grid.
    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    /// World coordinates of a cell center.
    pub fn cell_to_world(&self, c: CellIndex) -> (f64, f64) {
        (
            self.origin.0 + (c.ix as f64 + 0.5) * self.resolution,
            self.origin.1 + (c.iy as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing a world point, `None` outside the map.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<CellIndex> {
        let ix = ((x - self.origin.0) / self.resolution).floor();
        let iy = ((y - self.origin.1) / self.resolution).floor();
        if ix < 0.0 || iy < 0.0 || ix >= self.width as f64 || iy >= self.height as f64 {
            return None;
        }
        Some(CellIndex::new(ix as i32, iy as i32))
    }

    pub fn in_bounds(&self, c: CellIndex) -> bool {
        c.ix >= 0 && c.iy >= 0 && (c.ix as usize) < self.width && (c.iy as usize) < self.height
    }

    /// Squared distance to the nearest obstacle, in cell² units.
    pub fn sq_dist(&self, c: CellIndex) -> u32 {
        self.sq_dist[self.pack(c) as usize]
    }

    /// Nearest obstacle cell, if any obstacle exists.
    pub fn nearest_obstacle(&self, c: CellIndex) -> Option<CellIndex> {
        let s = self.site[self.pack(c) as usize];
        (s != NO_SITE).then(|| self.unpack(s))
    }

    pub fn is_voronoi(&self, c: CellIndex) -> bool {
        self.voronoi[self.pack(c) as usize]
    }

    pub fn is_obstacle(&self, c: CellIndex) -> bool {
        self.occupied[self.pack(c) as usize]
    }

    /// Euclidean clearance in meters; +∞ on obstacle-free maps.
    pub fn clearance_at(&self, c: CellIndex) -> f64 {
        let sq = self.sq_dist[self.pack(c) as usize];
        if sq == SQ_DIST_INF {
            f64::INFINITY
        } else {
            (sq as f64).sqrt() * self.resolution
        }
    }

    /// Whether the cell keeps at least `r_c` meters from the nearest
    /// obstacle cell center.
    pub fn meets_clearance(&self, c: CellIndex, r_c: f64) -> bool {
        self.clearance_at(c) >= r_c
    }

    /// Per-cell CSV dump `ix,iy,sq_dist,is_voronoi` for golden-file tests.
    pub fn dump_csv(&self) -> String {
        let mut out = String::with_capacity(self.sq_dist.len() * 12);
        out.push_str("ix,iy,sq_dist,is_voronoi\n");
        for iy in 0..self.height {
            for ix in 0..self.width {
                let i = iy * self.width + ix;
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    ix,
                    iy,
                    self.sq_dist[i],
                    u8::from(self.voronoi[i])
                );
            }
        }
        out
    }

    /// Assemble a map directly from its fields; corridor and search tests
    /// use this to pin exact Voronoi layouts.
    #[doc(hidden)]
    pub fn from_parts(
        width: usize,
        height: usize,
        resolution: f64,
        sq_dist: Vec<u32>,
        voronoi: Vec<bool>,
    ) -> Self {
        assert_eq!(sq_dist.len(), width * height);
        assert_eq!(voronoi.len(), width * height);
        let occupied = sq_dist.iter().map(|&d| d == 0).collect();
        let n = width * height;
        GvdMap {
            width,
            height,
            resolution,
            origin: (0.0, 0.0),
            site: vec![NO_SITE; n],
            sq_dist,
            voronoi,
            occupied,
            to_raise: vec![false; n],
            queue: BinaryHeap::new(),
            changed: Vec::new(),
            dirty: vec![false; n],
        }
    }

    fn pack(&self, c: CellIndex) -> u32 {
        debug_assert!(self.in_bounds(c));
        (c.iy as usize * self.width + c.ix as usize) as u32
    }

    fn unpack(&self, i: u32) -> CellIndex {
        CellIndex::new((i as usize % self.width) as i32, (i as usize / self.width) as i32)
    }

    fn sq_cell_dist(&self, a: u32, b: u32) -> u32 {
        let (ax, ay) = (a as usize % self.width, a as usize / self.width);
        let (bx, by) = (b as usize % self.width, b as usize / self.width);
        let dx = ax as i64 - bx as i64;
        let dy = ay as i64 - by as i64;
        (dx * dx + dy * dy) as u32
    }

    fn set_obstacle(&mut self, i: u32) {
        self.occupied[i as usize] = true;
        self.sq_dist[i as usize] = 0;
        self.site[i as usize] = i;
        self.to_raise[i as usize] = false;
        self.mark_changed(i);
        self.queue.push(Reverse((0, i)));
    }

    fn remove_obstacle(&mut self, i: u32) {
        self.occupied[i as usize] = false;
        self.queue.push(Reverse((self.sq_dist[i as usize], i)));
        self.sq_dist[i as usize] = SQ_DIST_INF;
        self.site[i as usize] = NO_SITE;
        self.to_raise[i as usize] = true;
        self.mark_changed(i);
    }

    fn mark_changed(&mut self, i: u32) {
        if !self.dirty[i as usize] {
            self.dirty[i as usize] = true;
            self.changed.push(i);
        }
    }

    fn propagate(&mut self) {
        while let Some(Reverse((key, s))) = self.queue.pop() {
            if self.to_raise[s as usize] {
                self.raise(s);
            } else {
                let site = self.site[s as usize];
                if site == NO_SITE || !self.occupied[site as usize] {
                    continue;
                }
                if key > self.sq_dist[s as usize] {
                    continue; // a fresher entry for s exists
                }
                self.lower(s);
            }
        }
    }

    fn raise(&mut self, s: u32) {
        let c = self.unpack(s);
        for (dx, dy) in NEIGHBORS_8 {
            let nc = c.offset(dx, dy);
            if !self.in_bounds(nc) {
                continue;
            }
            let n = self.pack(nc);
            let nu = n as usize;
            if self.site[nu] == NO_SITE || self.to_raise[nu] {
                continue;
            }
            if !self.occupied[self.site[nu] as usize] {
                // The neighbor pointed at a removed obstacle: clear it and
                // grow the raise wave through it.
                self.queue.push(Reverse((self.sq_dist[nu], n)));
                self.sq_dist[nu] = SQ_DIST_INF;
                self.site[nu] = NO_SITE;
                self.to_raise[nu] = true;
                self.mark_changed(n);
            } else {
                // Valid neighbor: it will re-lower into the cleared region.
                self.queue.push(Reverse((self.sq_dist[nu], n)));
            }
        }
        self.to_raise[s as usize] = false;
    }

    fn lower(&mut self, s: u32) {
        let site = self.site[s as usize];
        let c = self.unpack(s);
        for (dx, dy) in NEIGHBORS_8 {
            let nc = c.offset(dx, dy);
            if !self.in_bounds(nc) {
                continue;
            }
            let n = self.pack(nc);
            let nu = n as usize;
            if self.to_raise[nu] {
                continue;
            }
            let d = self.sq_cell_dist(site, n);
            let better = d < self.sq_dist[nu]
                || (d == self.sq_dist[nu] && site < self.site[nu]);
            if better {
                self.sq_dist[nu] = d;
                self.site[nu] = site;
                self.mark_changed(n);
                self.queue.push(Reverse((d, n)));
            }
        }
    }

    /// A free cell lies on the Voronoi edge set when some 8-neighbor is
    /// claimed by a distinct, non-adjacent obstacle (site cells more than
    /// one cell apart in the Chebyshev metric) and the cell sits no farther
    /// from the bisector than that neighbor. The bisector-side test compares
    /// how much each cell's distance grows when swapping to the other site;
    /// unlike marking both cells of every such pair, it is invariant under
    /// reflections of the obstacle layout even when equidistant ties resolve
    /// asymmetrically.
    fn voronoi_criterion(&self, i: u32) -> bool {
        let iu = i as usize;
        if self.occupied[iu] || self.site[iu] == NO_SITE {
            return false;
        }
        let my_site = self.site[iu];
        let (mx, my) = (
            my_site as usize % self.width,
            my_site as usize / self.width,
        );
        let c = self.unpack(i);
        for (dx, dy) in NEIGHBORS_8 {
            let nc = c.offset(dx, dy);
            if !self.in_bounds(nc) {
                continue;
            }
            let n = self.pack(nc);
            let other = self.site[n as usize];
            if other == NO_SITE {
                continue;
            }
            let (ox, oy) = (
                other as usize % self.width,
                other as usize / self.width,
            );
            let cheb = (mx as i64 - ox as i64)
                .abs()
                .max((my as i64 - oy as i64).abs());
            if cheb <= 1 {
                continue;
            }
            let stab_self =
                self.sq_cell_dist(i, other) as i64 - self.sq_dist[iu] as i64;
            let stab_other =
                self.sq_cell_dist(n, my_site) as i64 - self.sq_dist[n as usize] as i64;
            if stab_self <= stab_other {
                return true;
            }
        }
        false
    }

    /// Recompute Voronoi flags for all cells whose distance field changed,
    /// plus their neighbors (the criterion looks one cell out).
    fn refresh_voronoi_flags(&mut self) {
        let changed = std::mem::take(&mut self.changed);
        let mut stale: Vec<u32> = Vec::with_capacity(changed.len() * 2);
        for &i in &changed {
            stale.push(i);
            let c = self.unpack(i);
            for (dx, dy) in NEIGHBORS_8 {
                let nc = c.offset(dx, dy);
                if self.in_bounds(nc) {
                    stale.push(self.pack(nc));
                }
            }
        }
        for &i in &changed {
            self.dirty[i as usize] = false;
        }
        stale.sort_unstable();
        stale.dedup();
        for i in stale {
            self.voronoi[i as usize] = self.voronoi_criterion(i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_map::CellState;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn grid_with_obstacles(w: usize, h: usize, obstacles: &[(i32, i32)]) -> OccupancyGrid {
        let mut g = OccupancyGrid::filled(w, h, 0.1, (0.0, 0.0), CellState::Free);
        for &(x, y) in obstacles {
            g.set_state(CellIndex::new(x, y), CellState::Occupied);
        }
        g
    }

    /// O(cells × obstacles) reference distance map, independent of the
    /// wavefront implementation.
    fn brute_force_sq(grid: &OccupancyGrid) -> Vec<u32> {
        let w = grid.width() as i32;
        let h = grid.height() as i32;
        let mut obstacles = Vec::new();
        for iy in 0..h {
            for ix in 0..w {
                if !grid.is_traversable(CellIndex::new(ix, iy), UnknownPolicy::Obstacle) {
                    obstacles.push((ix, iy));
                }
            }
        }
        let mut out = vec![SQ_DIST_INF; (w * h) as usize];
        for iy in 0..h {
            for ix in 0..w {
                let mut best = SQ_DIST_INF;
                for &(ox, oy) in &obstacles {
                    let dx = (ix - ox) as i64;
                    let dy = (iy - oy) as i64;
                    best = best.min((dx * dx + dy * dy) as u32);
                }
                out[(iy * w + ix) as usize] = best;
            }
        }
        out
    }

    fn assert_matches_brute_force(grid: &OccupancyGrid, gvd: &GvdMap) {
        let want = brute_force_sq(grid);
        for iy in 0..grid.height() as i32 {
            for ix in 0..grid.width() as i32 {
                let c = CellIndex::new(ix, iy);
                assert_eq!(
                    gvd.sq_dist(c),
                    want[iy as usize * grid.width() + ix as usize],
                    "sq_dist mismatch at {c}"
                );
            }
        }
    }

    fn random_grid(rng: &mut ChaCha8Rng, w: usize, h: usize, obstacles: usize) -> OccupancyGrid {
        let mut g = OccupancyGrid::filled(w, h, 0.1, (0.0, 0.0), CellState::Free);
        for _ in 0..obstacles {
            let c = CellIndex::new(rng.gen_range(0..w as i32), rng.gen_range(0..h as i32));
            g.set_state(c, CellState::Occupied);
        }
        g
    }

    #[test]
    fn single_obstacle_squared_distance() {
        let grid = grid_with_obstacles(11, 11, &[(5, 5)]);
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        assert_eq!(gvd.sq_dist(CellIndex::new(5, 8)), 9);
        assert_eq!(gvd.sq_dist(CellIndex::new(5, 5)), 0);
        assert_eq!(gvd.sq_dist(CellIndex::new(0, 0)), 50);
        // One basin only: no Voronoi edges anywhere.
        for iy in 0..11 {
            for ix in 0..11 {
                assert!(!gvd.is_voronoi(CellIndex::new(ix, iy)));
            }
        }
    }

    #[test]
    fn two_walls_voronoi_band_is_symmetric() {
        let mut grid = OccupancyGrid::filled(11, 7, 0.1, (0.0, 0.0), CellState::Free);
        for iy in 0..7 {
            grid.set_state(CellIndex::new(0, iy), CellState::Occupied);
            grid.set_state(CellIndex::new(10, iy), CellState::Occupied);
        }
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        for iy in 0..7 {
            for ix in 1..10 {
                let c = CellIndex::new(ix, iy);
                let expect = ix == 5;
                assert_eq!(gvd.is_voronoi(c), expect, "voronoi flag at {c}");
            }
        }
    }

    #[test]
    fn no_obstacles_all_infinite() {
        let grid = OccupancyGrid::filled(8, 8, 0.1, (0.0, 0.0), CellState::Free);
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        for iy in 0..8 {
            for ix in 0..8 {
                let c = CellIndex::new(ix, iy);
                assert_eq!(gvd.sq_dist(c), SQ_DIST_INF);
                assert!(!gvd.is_voronoi(c));
                assert!(gvd.clearance_at(c).is_infinite());
            }
        }
    }

    #[test]
    fn random_maps_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..8 {
            let grid = random_grid(&mut rng, 50, 50, 100);
            let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
            assert_matches_brute_force(&grid, &gvd);
        }
    }

    #[test]
    fn sparse_large_map_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..4 {
            let grid = random_grid(&mut rng, 100, 100, 12);
            let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
            assert_matches_brute_force(&grid, &gvd);
        }
    }

    #[test]
    fn clearance_scaling() {
        let grid = grid_with_obstacles(11, 11, &[(0, 0)]);
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        assert_eq!(gvd.clearance_at(CellIndex::new(0, 0)), 0.0);
        // sq_dist 25 at (3, 4): hypotenuse 5 cells at 0.1 m.
        assert!((gvd.clearance_at(CellIndex::new(3, 4)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_delta_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let grid = random_grid(&mut rng, 30, 30, 40);
        let mut gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        let before = gvd.dump_csv();
        gvd.apply_delta(&MapDelta::default()).unwrap();
        assert_eq!(gvd.dump_csv(), before);
    }

    #[test]
    fn occupy_then_free_restores_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let grid = random_grid(&mut rng, 30, 30, 40);
        let mut gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        let before = gvd.dump_csv();
        let cell = CellIndex::new(14, 17);
        assert!(!gvd.is_obstacle(cell));
        gvd.apply_delta(&MapDelta {
            newly_occupied: vec![cell],
            newly_freed: vec![],
        })
        .unwrap();
        gvd.apply_delta(&MapDelta {
            newly_occupied: vec![],
            newly_freed: vec![cell],
        })
        .unwrap();
        assert_eq!(gvd.dump_csv(), before);
    }

    #[test]
    fn out_of_bounds_delta_leaves_map_unchanged() {
        let grid = grid_with_obstacles(10, 10, &[(4, 4)]);
        let mut gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        let before = gvd.dump_csv();
        let err = gvd.apply_delta(&MapDelta {
            newly_occupied: vec![CellIndex::new(3, 3), CellIndex::new(12, 0)],
            newly_freed: vec![],
        });
        assert!(matches!(err, Err(GvdError::DeltaOutOfBounds(_))));
        assert_eq!(gvd.dump_csv(), before);
    }

    #[test]
    fn random_deltas_match_rebuild() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut grid = random_grid(&mut rng, 50, 50, 60);
        let mut gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        for step in 0..30 {
            let c = CellIndex::new(rng.gen_range(0..50), rng.gen_range(0..50));
            let occupy = !matches!(grid.state(c), CellState::Occupied);
            let delta = if occupy {
                grid.set_state(c, CellState::Occupied);
                MapDelta {
                    newly_occupied: vec![c],
                    newly_freed: vec![],
                }
            } else {
                grid.set_state(c, CellState::Free);
                MapDelta {
                    newly_occupied: vec![],
                    newly_freed: vec![c],
                }
            };
            gvd.apply_delta(&delta).unwrap();
            let rebuilt = GvdMap::build(&grid, UnknownPolicy::Obstacle);
            assert_eq!(
                gvd.dump_csv(),
                rebuilt.dump_csv(),
                "divergence after delta {step} at {c}"
            );
        }
    }

    #[test]
    fn mirror_symmetry_of_voronoi_set() {
        // Obstacle layout symmetric about the vertical center line. Mirror
        // pairs sit an odd number of cells apart so no cell is exactly
        // equidistant to a pair; such knife-edge ties resolve by cell id,
        // which a reflection does not preserve.
        let mut grid = OccupancyGrid::filled(20, 15, 0.1, (0.0, 0.0), CellState::Free);
        for &(x, y) in &[(3, 3), (5, 11), (8, 7)] {
            grid.set_state(CellIndex::new(x, y), CellState::Occupied);
            grid.set_state(CellIndex::new(19 - x, y), CellState::Occupied);
        }
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        for iy in 0..15 {
            for ix in 0..20 {
                let c = CellIndex::new(ix, iy);
                let m = CellIndex::new(19 - ix, iy);
                assert_eq!(
                    gvd.is_voronoi(c),
                    gvd.is_voronoi(m),
                    "asymmetric voronoi flag at {c} vs {m}"
                );
            }
        }
    }

    #[test]
    fn even_gap_watershed_marks_both_columns_symmetrically() {
        // Walls at ix=0 and ix=9: the bisector runs between columns 4 and 5,
        // so both get flagged and the set mirrors onto itself.
        let mut grid = OccupancyGrid::filled(10, 6, 0.1, (0.0, 0.0), CellState::Free);
        for iy in 0..6 {
            grid.set_state(CellIndex::new(0, iy), CellState::Occupied);
            grid.set_state(CellIndex::new(9, iy), CellState::Occupied);
        }
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        for iy in 0..6 {
            for ix in 1..9 {
                let c = CellIndex::new(ix, iy);
                assert_eq!(gvd.is_voronoi(c), ix == 4 || ix == 5, "flag at {c}");
            }
        }
    }

    proptest::proptest! {
        /// Any delta sequence composed through apply_delta ends cell-equal
        /// to one from-scratch build on the final grid.
        #[test]
        fn incremental_equals_rebuild(
            obstacle_bits in proptest::collection::vec(proptest::bool::weighted(0.15), 144),
            deltas in proptest::collection::vec((0usize..144, proptest::bool::ANY), 1..6),
        ) {
            let mut grid = OccupancyGrid::filled(12, 12, 0.1, (0.0, 0.0), CellState::Free);
            for (i, b) in obstacle_bits.iter().enumerate() {
                if *b {
                    grid.set_state(CellIndex::new((i % 12) as i32, (i / 12) as i32), CellState::Occupied);
                }
            }
            let mut gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
            for (idx, occupy) in deltas {
                let c = CellIndex::new((idx % 12) as i32, (idx / 12) as i32);
                let delta = if occupy {
                    grid.set_state(c, CellState::Occupied);
                    MapDelta { newly_occupied: vec![c], newly_freed: vec![] }
                } else {
                    grid.set_state(c, CellState::Free);
                    MapDelta { newly_occupied: vec![], newly_freed: vec![c] }
                };
                gvd.apply_delta(&delta).unwrap();
            }
            let rebuilt = GvdMap::build(&grid, UnknownPolicy::Obstacle);
            proptest::prop_assert_eq!(gvd.dump_csv(), rebuilt.dump_csv());
        }
    }

    #[test]
    fn lipschitz_between_neighbors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = random_grid(&mut rng, 40, 40, 50);
        let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
        for iy in 0..40 {
            for ix in 0..40 {
                let c = CellIndex::new(ix, iy);
                let dc = (gvd.sq_dist(c) as f64).sqrt();
                for (dx, dy) in NEIGHBORS_8 {
                    let n = c.offset(dx, dy);
                    if !gvd.in_bounds(n) {
                        continue;
                    }
                    let dn = (gvd.sq_dist(n) as f64).sqrt();
                    let step = ((dx * dx + dy * dy) as f64).sqrt();
                    assert!(
                        (dc - dn).abs() <= step + 1e-9,
                        "Lipschitz violated between {c} and {n}"
                    );
                }
            }
        }
    }
}
