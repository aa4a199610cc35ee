//! State-lattice A* over (x, y, θ) inside the Voronoi corridor.
//!
//! Edges are the precomputed motion primitives; an edge is feasible when its
//! translated swath stays inside the corridor and clear of obstacles, and it
//! costs its minimum travel time scaled by one plus the largest Voronoi
//! potential under the swath. The 2-D heuristic is a Dijkstra pass from the
//! goal cell over corridor cells with the same potential weighting, so the
//! search and its guidance price obstacle proximity consistently.
//!
//! All tie-breaking is pinned (lower heuristic first, then insertion order),
//! which makes expansion counts reproducible run to run.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use thiserror::Error;

use crate::corridor::VoronoiCorridor;
use crate::field::VoronoiField;
use crate::grid_map::{CellIndex, NEIGHBORS_8};
use crate::gvd::GvdMap;
use crate::primitives::{
    footprint_disc, heading_angle, nearest_heading, MotionPrimitive, Pose, PrimitiveSet,
    NUM_HEADINGS,
};

#[derive(Debug, Clone, Copy)]
pub struct SpeedLimits {
    pub v_max: f64,
    pub omega_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeState {
    pub cell: CellIndex,
    pub heading: usize,
}

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("speed limits must be positive (v_max={v_max}, omega_max={omega_max})")]
    InvalidLimits { v_max: f64, omega_max: f64 },
    #[error("goal cell {0} is outside the corridor")]
    GoalOutsideCorridor(CellIndex),
    #[error("cannot snap {which} pose ({x:.3}, {y:.3}) to a collision-free corridor cell within {radius:.3} m")]
    SnapFailed {
        which: &'static str,
        x: f64,
        y: f64,
        radius: f64,
    },
    #[error("no path inside the corridor ({expansions} states expanded)")]
    NoPath { expansions: usize },
}

/// Per-cell cost-to-go map from a Dijkstra pass over the corridor.
#[derive(Debug, Clone)]
pub struct HeuristicMap {
    width: usize,
    h: Vec<f64>,
    pub goal: CellIndex,
}

impl HeuristicMap {
    pub fn value(&self, c: CellIndex) -> f64 {
        self.h[c.iy as usize * self.width + c.ix as usize]
    }
}

/// Search outcome plus the effort metrics the benchmarks report.
#[derive(Debug, Clone)]
pub struct SearchResult {
    /// Concatenated primitive poses in world coordinates.
    pub path: Vec<Pose>,
    /// Accumulated potential-weighted travel time, seconds.
    pub cost: f64,
    /// States popped and expanded.
    pub expansions: usize,
    /// Distinct states ever created in the search graph.
    pub graph_size: usize,
    /// Wall-clock search time, seconds.
    pub wall_time: f64,
    /// Start/goal states after snapping.
    pub start: LatticeState,
    pub goal: LatticeState,
}

impl SearchResult {
    /// One metrics row: expansions, time, graph size, path cost.
    pub fn metrics_csv(&self) -> String {
        format!(
            "expansions,time_ms,graph_size,path_cost\n{},{:.3},{},{:.9}\n",
            self.expansions,
            self.wall_time * 1e3,
            self.graph_size,
            self.cost
        )
    }

    /// Pose list as `x y theta` lines.
    pub fn path_text(&self) -> String {
        let mut out = String::new();
        for p in &self.path {
            out.push_str(&format!("{:.6} {:.6} {:.9}\n", p.x, p.y, p.theta));
        }
        out
    }

    /// Total xy length of the searched path, meters.
    pub fn path_length(&self) -> f64 {
        self.path
            .windows(2)
            .map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt())
            .sum()
    }
}

/// Minimum travel time of one primitive under uniform motion: the slower of
/// covering its length at `v_max` and its heading change at `omega_max`.
pub fn primitive_time(prim: &MotionPrimitive, limits: &SpeedLimits) -> f64 {
    (prim.length / limits.v_max).max(prim.delta_theta / limits.omega_max)
}

/// Travel-time cost of applying `prim` from `at`, weighted by the peak
/// Voronoi potential under the swath; `None` when the swath leaves the
/// corridor, leaves the map, or touches an obstacle, or when a centerline
/// cell drops below `r_c` of clearance (which keeps every searched-path
/// vertex usable as a smoother reference).
pub fn primitive_cost(
    prim: &MotionPrimitive,
    at: CellIndex,
    field: &VoronoiField,
    gvd: &GvdMap,
    limits: &SpeedLimits,
    r_c: f64,
) -> Option<f64> {
    let mut max_rho = 0.0f64;
    for offset in &prim.swath {
        let c = at.offset(offset.ix, offset.iy);
        if !gvd.in_bounds(c) || gvd.is_obstacle(c) {
            return None;
        }
        match field.rho_at(c) {
            Some(rho) => max_rho = max_rho.max(rho),
            None => return None, // outside the corridor
        }
    }
    for offset in &prim.center_cells {
        let c = at.offset(offset.ix, offset.iy);
        if !gvd.in_bounds(c) || !gvd.meets_clearance(c, r_c) {
            return None;
        }
    }
    Some(primitive_time(prim, limits) * (max_rho + 1.0))
}

/// Dijkstra from the goal over corridor cells, 8-connected. Each step costs
/// its length over `v_max` scaled by one plus the potential of the cell being
/// entered, mirroring the primitive cost definition.
pub fn build_h2d(
    corridor: &VoronoiCorridor,
    goal: CellIndex,
    field: &VoronoiField,
    limits: &SpeedLimits,
    resolution: f64,
) -> Result<HeuristicMap, LatticeError> {
    if !corridor.contains(goal) {
        return Err(LatticeError::GoalOutsideCorridor(goal));
    }
    let w = corridor.width();
    let h = corridor.height();
    let idx = |c: CellIndex| c.iy as usize * w + c.ix as usize;
    let mut dist = vec![f64::INFINITY; w * h];
    let mut heap: BinaryHeap<Reverse<(u64, u32)>> = BinaryHeap::new();
    // f64 keys ordered through their bit pattern: nonnegative IEEE doubles
    // sort correctly as unsigned integers.
    let key = |d: f64| d.to_bits();
    dist[idx(goal)] = 0.0;
    heap.push(Reverse((key(0.0), idx(goal) as u32)));
    while let Some(Reverse((k, i))) = heap.pop() {
        let iu = i as usize;
        if k > key(dist[iu]) {
            continue;
        }
        let c = CellIndex::new((iu % w) as i32, (iu / w) as i32);
        for (dx, dy) in NEIGHBORS_8 {
            let n = c.offset(dx, dy);
            if !corridor.contains(n) {
                continue;
            }
            let step = if dx == 0 || dy == 0 {
                resolution
            } else {
                resolution * std::f64::consts::SQRT_2
            };
            let rho = match field.rho_at(n) {
                Some(r) => r,
                None => continue,
            };
            let cand = dist[iu] + step / limits.v_max * (rho + 1.0);
            let ni = idx(n);
            if cand < dist[ni] {
                dist[ni] = cand;
                heap.push(Reverse((key(cand), ni as u32)));
            }
        }
    }
    Ok(HeuristicMap {
        width: w,
        h: dist,
        goal,
    })
}

/// Snap a world pose onto the nearest corridor cell (within `2 r_c`) whose
/// circumscribed disc is collision-free, plus the nearest lattice heading.
fn snap_pose(
    pose: &Pose,
    which: &'static str,
    gvd: &GvdMap,
    corridor: &VoronoiCorridor,
    disc: &[CellIndex],
    r_c: f64,
) -> Result<LatticeState, LatticeError> {
    let res = gvd.resolution();
    let radius = 2.0 * r_c;
    let span = (radius / res).ceil() as i32;
    let fx = (pose.x - gvd.origin().0) / res - 0.5;
    let fy = (pose.y - gvd.origin().1) / res - 0.5;
    let cx = fx.round() as i32;
    let cy = fy.round() as i32;
    let mut best: Option<(f64, CellIndex)> = None;
    for iy in cy - span..=cy + span {
        for ix in cx - span..=cx + span {
            let c = CellIndex::new(ix, iy);
            if !gvd.in_bounds(c) || !corridor.contains(c) {
                continue;
            }
            let (wx, wy) = gvd.cell_to_world(c);
            let d = ((wx - pose.x).powi(2) + (wy - pose.y).powi(2)).sqrt();
            if d > radius {
                continue;
            }
            let clear = disc.iter().all(|o| {
                let cc = c.offset(o.ix, o.iy);
                gvd.in_bounds(cc) && !gvd.is_obstacle(cc)
            });
            if !clear {
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
    match best {
        Some((_, cell)) => Ok(LatticeState {
            cell,
            heading: nearest_heading(pose.theta),
        }),
        None => Err(LatticeError::SnapFailed {
            which,
            x: pose.x,
            y: pose.y,
            radius,
        }),
    }
}

#[derive(PartialEq)]
struct OpenEntry {
    f: f64,
    h: f64,
    seq: u64,
    state: u32,
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.f
            .total_cmp(&other.f)
            .then(self.h.total_cmp(&other.h))
            .then(self.seq.cmp(&other.seq))
    }
}

/// A* with motion primitives from `start` to `goal`, restricted to the
/// corridor. The goal test requires the exact goal cell and heading index.
pub fn plan(
    start: &Pose,
    goal: &Pose,
    gvd: &GvdMap,
    corridor: &VoronoiCorridor,
    field: &VoronoiField,
    prims: &PrimitiveSet,
    limits: &SpeedLimits,
) -> Result<SearchResult, LatticeError> {
    if !(limits.v_max > 0.0) || !(limits.omega_max > 0.0) {
        return Err(LatticeError::InvalidLimits {
            v_max: limits.v_max,
            omega_max: limits.omega_max,
        });
    }
    let t0 = Instant::now();
    let r_c = prims.r_c();
    let disc = footprint_disc(prims.footprint_half_width, prims.resolution);
    let start_state = snap_pose(start, "start", gvd, corridor, &disc, r_c)?;
    let goal_state = snap_pose(goal, "goal", gvd, corridor, &disc, r_c)?;

    let mk_pose = |s: &LatticeState| {
        let (x, y) = gvd.cell_to_world(s.cell);
        Pose::new(x, y, heading_angle(s.heading))
    };
    if start_state == goal_state {
        return Ok(SearchResult {
            path: vec![mk_pose(&start_state)],
            cost: 0.0,
            expansions: 0,
            graph_size: 1,
            wall_time: t0.elapsed().as_secs_f64(),
            start: start_state,
            goal: goal_state,
        });
    }

    let h2d = build_h2d(corridor, goal_state.cell, field, limits, gvd.resolution())?;
    let mut expansions = 0usize;
    if h2d.value(start_state.cell).is_infinite() {
        return Err(LatticeError::NoPath { expansions });
    }

    let w = gvd.width();
    let n_states = w * gvd.height() * NUM_HEADINGS;
    let pack = |s: &LatticeState| {
        ((s.cell.iy as usize * w + s.cell.ix as usize) * NUM_HEADINGS + s.heading) as u32
    };
    let unpack_cell = |i: u32| {
        let cell = i as usize / NUM_HEADINGS;
        (
            CellIndex::new((cell % w) as i32, (cell / w) as i32),
            i as usize % NUM_HEADINGS,
        )
    };

    let mut g = vec![f64::INFINITY; n_states];
    let mut parent: Vec<(u32, u32)> = vec![(u32::MAX, u32::MAX); n_states];
    let mut closed = vec![false; n_states];
    let mut open = BinaryHeap::new();
    let mut graph_size = 1usize;
    let mut seq = 0u64;
    let s0 = pack(&start_state);
    let goal_packed = pack(&goal_state);
    g[s0 as usize] = 0.0;
    let h0 = h2d.value(start_state.cell);
    open.push(Reverse(OpenEntry {
        f: h0,
        h: h0,
        seq,
        state: s0,
    }));

    while let Some(Reverse(entry)) = open.pop() {
        let su = entry.state as usize;
        if closed[su] {
            continue;
        }
        closed[su] = true;
        expansions += 1;
        if entry.state == goal_packed {
            // Reconstruct primitive chain backwards.
            let mut chain = Vec::new();
            let mut at = entry.state;
            while parent[at as usize].0 != u32::MAX {
                let (prev, prim_idx) = parent[at as usize];
                chain.push((prev, prim_idx));
                at = prev;
            }
            chain.reverse();
            let mut path = vec![mk_pose(&start_state)];
            for (state, prim_idx) in chain {
                let (cell, _) = unpack_cell(state);
                let (ox, oy) = gvd.cell_to_world(cell);
                let prim = &prims.primitives[prim_idx as usize];
                // The first pose duplicates the previous primitive's end.
                for p in &prim.poses[1..] {
                    path.push(Pose::new(p.x + ox, p.y + oy, p.theta));
                }
            }
            return Ok(SearchResult {
                path,
                cost: g[su],
                expansions,
                graph_size,
                wall_time: t0.elapsed().as_secs_f64(),
                start: start_state,
                goal: goal_state,
            });
        }
        let (cell, heading) = unpack_cell(entry.state);
        debug_assert!(corridor.contains(cell));
        for &prim_idx in prims.heading_indices(heading) {
            let prim = &prims.primitives[prim_idx as usize];
            let cost = match primitive_cost(prim, cell, field, gvd, limits, r_c) {
                Some(c) => c,
                None => continue,
            };
            let succ_cell = cell.offset(prim.end_offset.0, prim.end_offset.1);
            let succ = LatticeState {
                cell: succ_cell,
                heading: prim.end_heading,
            };
            let hs = h2d.value(succ.cell);
            if hs.is_infinite() {
                continue;
            }
            let sp = pack(&succ) as usize;
            if closed[sp] {
                continue;
            }
            let cand = g[su] + cost;
            if cand < g[sp] {
                if g[sp].is_infinite() {
                    graph_size += 1;
                }
                g[sp] = cand;
                parent[sp] = (entry.state, prim_idx);
                seq += 1;
                open.push(Reverse(OpenEntry {
                    f: cand + hs,
                    h: hs,
                    seq,
                    state: sp as u32,
                }));
            }
        }
    }
    Err(LatticeError::NoPath { expansions })
}
