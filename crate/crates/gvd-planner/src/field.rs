//! Voronoi potential field over the corridor.
//!
//! Every corridor cell gets `d_v`, the exact Euclidean distance to the
//! nearest Voronoi edge cell, and a potential `rho` in [0, 1] that is 1 inside
//! obstacles, 0 on Voronoi edges and everywhere farther than the safety
//! threshold from obstacles, and blends smoothly in between:
//!
//! ```text
//! rho(d_o, d_v) = d_v / (d_o + d_v) * (d_o - d_min)^2 / d_min^2   if d_o <= d_min
//!                 0                                               otherwise
//! ```
//!
//! `d_v` comes from a two-pass exact squared-distance transform seeded at the
//! Voronoi cells: a per-column sweep for vertical distances, then a
//! per-row lower-envelope pass over the squared column results. Both passes
//! are independent per column/row, so with the `parallel` feature they fan
//! out over rayon; `squared_edt_seq` is the sequential fallback and stays
//! available for benchmarking one against the other.

use std::fmt::Write as _;

use thiserror::Error;

use crate::corridor::VoronoiCorridor;
use crate::grid_map::CellIndex;
use crate::gvd::GvdMap;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("rho is undefined at d_o = d_v = 0")]
    DegeneratePoint,
    #[error("d_o_min must be positive, got {0}")]
    BadThreshold(f64),
}

/// Squared-distance sentinel for rows/columns with no seed anywhere.
pub const EDT_INF: u32 = u32::MAX;

/// Below this many cells the fork-join overhead outweighs the per-row work
/// and the transform runs sequentially even with the `parallel` feature.
#[cfg(feature = "parallel")]
const PARALLEL_EDT_THRESHOLD: usize = 1 << 17;

/// Exact squared Euclidean distance transform on a `width` x `height` grid.
/// `seeds[i]` true marks distance-zero cells. Output in squared cell units;
/// `EDT_INF` where no seed exists at all.
pub fn squared_edt(seeds: &[bool], width: usize, height: usize) -> Vec<u32> {
    #[cfg(feature = "parallel")]
    {
        if width * height >= PARALLEL_EDT_THRESHOLD {
            return squared_edt_par(seeds, width, height);
        }
    }
    squared_edt_seq(seeds, width, height)
}

/// Sequential reference implementation of [`squared_edt`].
pub fn squared_edt_seq(seeds: &[bool], width: usize, height: usize) -> Vec<u32> {
    assert_eq!(seeds.len(), width * height);
    // Pass 1: per-column nearest seed row distance, stored column-major so
    // each column is a contiguous chunk.
    let mut col_sq = vec![EDT_INF; width * height];
    for x in 0..width {
        column_pass(seeds, width, height, x, &mut col_sq[x * height..(x + 1) * height]);
    }
    // Pass 2: per-row lower envelope over the squared column distances.
    let mut out = vec![EDT_INF; width * height];
    let mut scratch = RowScratch::new(width);
    for (y, row) in out.chunks_mut(width).enumerate() {
        row_pass(&col_sq, height, y, row, &mut scratch);
    }
    out
}

/// Rayon-parallel transform: pass 1 fans out over columns, pass 2 over rows.
#[cfg(feature = "parallel")]
pub fn squared_edt_par(seeds: &[bool], width: usize, height: usize) -> Vec<u32> {
    use rayon::prelude::*;
    assert_eq!(seeds.len(), width * height);
    let mut col_sq = vec![EDT_INF; width * height];
    col_sq
        .par_chunks_mut(height)
        .enumerate()
        .for_each(|(x, col)| column_pass(seeds, width, height, x, col));
    let mut out = vec![EDT_INF; width * height];
    out.par_chunks_mut(width)
        .enumerate()
        .for_each_init(
            || RowScratch::new(width),
            |scratch, (y, row)| row_pass(&col_sq, height, y, row, scratch),
        );
    out
}

/// Nearest seed row distance (squared) within one column, two linear sweeps.
fn column_pass(seeds: &[bool], width: usize, height: usize, x: usize, col: &mut [u32]) {
    let mut last: i64 = i64::MIN / 4;
    for y in 0..height {
        if seeds[y * width + x] {
            last = y as i64;
        }
        let d = y as i64 - last;
        col[y] = if d > height as i64 { EDT_INF } else { (d * d) as u32 };
    }
    last = i64::MAX / 4;
    for y in (0..height).rev() {
        if seeds[y * width + x] {
            last = y as i64;
        }
        let d = last - y as i64;
        if d <= height as i64 {
            col[y] = col[y].min((d * d) as u32);
        }
    }
}

struct RowScratch {
    /// Column index of each envelope parabola.
    v: Vec<usize>,
    /// Breakpoints between consecutive envelope parabolas.
    z: Vec<f64>,
}

impl RowScratch {
    fn new(width: usize) -> Self {
        RowScratch {
            v: vec![0; width],
            z: vec![0.0; width + 1],
        }
    }
}

/// Lower envelope of the parabolas `(x - q)^2 + col_sq[q]` across one row.
/// Envelope breakpoints are computed in f64 but every output value is an
/// exact integer: at integer x the winning parabola value is evaluated in
/// integer arithmetic.
fn row_pass(col_sq: &[u32], height: usize, y: usize, row: &mut [u32], scratch: &mut RowScratch) {
    let width = row.len();
    let g = |q: usize| col_sq[q * height + y];
    let mut k = 0usize;
    let mut any = false;
    for q in 0..width {
        let gq = g(q);
        if gq == EDT_INF {
            continue;
        }
        let fq = gq as f64 + (q * q) as f64;
        if !any {
            scratch.v[0] = q;
            scratch.z[0] = f64::NEG_INFINITY;
            scratch.z[1] = f64::INFINITY;
            any = true;
            continue;
        }
        loop {
            let p = scratch.v[k];
            let fp = g(p) as f64 + (p * p) as f64;
            let s = (fq - fp) / (2.0 * (q as f64 - p as f64));
            if s <= scratch.z[k] {
                if k == 0 {
                    scratch.v[0] = q;
                    scratch.z[0] = f64::NEG_INFINITY;
                    scratch.z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                scratch.v[k] = q;
                scratch.z[k] = s;
                scratch.z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    if !any {
        for o in row.iter_mut() {
            *o = EDT_INF;
        }
        return;
    }
    let mut k = 0usize;
    for x in 0..width {
        while scratch.z[k + 1] < x as f64 {
            k += 1;
        }
        let q = scratch.v[k];
        let dx = x as i64 - q as i64;
        row[x] = (dx * dx) as u32 + g(q);
    }
}

/// Squared cell distances to the nearest Voronoi edge cell over the whole
/// grid; the bool reports whether any edge cell existed.
fn voronoi_seed_edt(
    gvd: &GvdMap,
    edt: fn(&[bool], usize, usize) -> Vec<u32>,
) -> (Vec<u32>, bool) {
    let w = gvd.width();
    let h = gvd.height();
    let mut seeds = vec![false; w * h];
    let mut any_seed = false;
    for iy in 0..h as i32 {
        for ix in 0..w as i32 {
            if gvd.is_voronoi(CellIndex::new(ix, iy)) {
                seeds[iy as usize * w + ix as usize] = true;
                any_seed = true;
            }
        }
    }
    if any_seed {
        (edt(&seeds, w, h), true)
    } else {
        (vec![EDT_INF; w * h], false)
    }
}

/// Euclidean distance (meters) from every corridor cell to the nearest
/// Voronoi edge cell, row-major over the whole grid with +∞ outside the
/// corridor. The flag is true when no Voronoi cell exists anywhere, in
/// which case every distance is +∞.
///
/// The transform runs over the full grid: the nearest edge cell to a
/// corridor cell may sit outside the corridor's bounding box, and the
/// result is exact by contract.
pub fn distance_to_voronoi(gvd: &GvdMap, corridor: &VoronoiCorridor) -> (Vec<f64>, bool) {
    let (sq, any_seed) = voronoi_seed_edt(gvd, squared_edt);
    let res = gvd.resolution();
    let w = gvd.width();
    let out = sq
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let c = CellIndex::new((i % w) as i32, (i / w) as i32);
            if !corridor.contains(c) || q == EDT_INF {
                f64::INFINITY
            } else {
                (q as f64).sqrt() * res
            }
        })
        .collect();
    (out, !any_seed)
}

/// Potential value of one point, Voronoi-edge distance `d_v` and obstacle
/// distance `d_o` given in meters.
pub fn rho_v(d_o: f64, d_v: f64, d_o_min: f64) -> Result<f64, FieldError> {
    if !(d_o_min > 0.0) {
        return Err(FieldError::BadThreshold(d_o_min));
    }
    if d_o == 0.0 && d_v == 0.0 {
        return Err(FieldError::DegeneratePoint);
    }
    if d_o > d_o_min {
        return Ok(0.0);
    }
    let ratio = if d_v.is_infinite() {
        1.0 // limit of d_v / (d_o + d_v) as d_v grows without bound
    } else {
        d_v / (d_o + d_v)
    };
    let falloff = (d_o - d_o_min) * (d_o - d_o_min) / (d_o_min * d_o_min);
    Ok(ratio * falloff)
}

/// Per-cell `d_v` and `rho` over the corridor's bounding box.
#[derive(Debug, Clone)]
pub struct VoronoiField {
    width: usize,
    height: usize,
    bbox: (i32, i32, i32, i32),
    stride: usize,
    d_v: Vec<f64>,
    rho: Vec<f64>,
    in_corridor: Vec<bool>,
    /// Full-grid obstacle mask: grazing cost queries outside the corridor
    /// bounding box still need the peak potential on obstacle cells.
    obstacle: Vec<bool>,
    pub d_o_min: f64,
    /// Set when no Voronoi cell exists anywhere: every d_v is +∞.
    pub no_voronoi_warning: bool,
}

impl VoronoiField {
    /// Build the field, choosing the parallel distance transform when the
    /// `parallel` feature is on.
    pub fn build(gvd: &GvdMap, corridor: &VoronoiCorridor, d_o_min: f64) -> Result<Self, FieldError> {
        Self::build_inner(gvd, corridor, d_o_min, squared_edt)
    }

    /// Sequential fallback of [`VoronoiField::build`].
    pub fn build_seq(
        gvd: &GvdMap,
        corridor: &VoronoiCorridor,
        d_o_min: f64,
    ) -> Result<Self, FieldError> {
        Self::build_inner(gvd, corridor, d_o_min, squared_edt_seq)
    }

    fn build_inner(
        gvd: &GvdMap,
        corridor: &VoronoiCorridor,
        d_o_min: f64,
        edt: fn(&[bool], usize, usize) -> Vec<u32>,
    ) -> Result<Self, FieldError> {
        if !(d_o_min > 0.0) {
            return Err(FieldError::BadThreshold(d_o_min));
        }
        let w = gvd.width();
        let h = gvd.height();
        let res = gvd.resolution();
        let (sq_v, any_seed) = voronoi_seed_edt(gvd, edt);

        let bbox = corridor.bbox();
        let stride = (bbox.2 - bbox.0 + 1).max(1) as usize;
        let rows = (bbox.3 - bbox.1 + 1).max(1) as usize;
        let mut obstacle = vec![false; w * h];
        for iy in 0..h as i32 {
            for ix in 0..w as i32 {
                let c = CellIndex::new(ix, iy);
                obstacle[iy as usize * w + ix as usize] = gvd.is_obstacle(c);
            }
        }
        let mut field = VoronoiField {
            width: w,
            height: h,
            bbox,
            stride,
            d_v: vec![f64::INFINITY; stride * rows],
            rho: vec![0.0; stride * rows],
            in_corridor: vec![false; stride * rows],
            obstacle,
            d_o_min,
            no_voronoi_warning: !any_seed,
        };
        for iy in bbox.1..=bbox.3 {
            for ix in bbox.0..=bbox.2 {
                let c = CellIndex::new(ix, iy);
                let li = field.local_index(c);
                if !corridor.contains(c) {
                    continue;
                }
                let sq = sq_v[iy as usize * w + ix as usize];
                let d_v = if sq == EDT_INF {
                    f64::INFINITY
                } else {
                    (sq as f64).sqrt() * res
                };
                let d_o = gvd.clearance_at(c);
                field.in_corridor[li] = true;
                field.d_v[li] = d_v;
                field.rho[li] = rho_v(d_o, d_v, d_o_min)?;
            }
        }
        Ok(field)
    }

    fn local_index(&self, c: CellIndex) -> usize {
        (c.iy - self.bbox.1) as usize * self.stride + (c.ix - self.bbox.0) as usize
    }

    fn in_bbox(&self, c: CellIndex) -> bool {
        c.ix >= self.bbox.0 && c.ix <= self.bbox.2 && c.iy >= self.bbox.1 && c.iy <= self.bbox.3
    }

    /// Distance to the nearest Voronoi edge, meters; `None` outside the
    /// corridor.
    pub fn d_v_at(&self, c: CellIndex) -> Option<f64> {
        if self.in_bbox(c) && self.in_corridor[self.local_index(c)] {
            Some(self.d_v[self.local_index(c)])
        } else {
            None
        }
    }

    /// Potential at a cell: corridor cells carry their computed value, and
    /// obstacle cells report the maximum potential 1 so that cost queries
    /// grazing them see the obstacle penalty. Everything else is `None`.
    pub fn rho_at(&self, c: CellIndex) -> Option<f64> {
        if self.in_bbox(c) && self.in_corridor[self.local_index(c)] {
            return Some(self.rho[self.local_index(c)]);
        }
        if c.ix >= 0
            && c.iy >= 0
            && (c.ix as usize) < self.width
            && (c.iy as usize) < self.height
            && self.obstacle[c.iy as usize * self.width + c.ix as usize]
        {
            return Some(1.0);
        }
        None
    }

    /// CSV dump `ix,iy,d_o,d_v,rho` of all corridor cells (the data behind
    /// the potential heat map).
    pub fn dump_csv(&self, gvd: &GvdMap, corridor: &VoronoiCorridor) -> String {
        let mut out = String::from("ix,iy,d_o,d_v,rho\n");
        for c in corridor.iter_members() {
            let li = self.local_index(c);
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.9}",
                c.ix,
                c.iy,
                gvd.clearance_at(c),
                self.d_v[li],
                self.rho[li]
            );
        }
        out
    }
}
