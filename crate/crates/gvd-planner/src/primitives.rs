//! Offline generation, swath rasterization, and serialization of lattice
//! motion primitives.
//!
//! The heading space uses the 16 rational lattice directions with components
//! in [-2, 2], ordered by angle, so every primitive endpoint lands exactly on
//! a cell center and the set closes under composition. Per heading the set
//! holds two straight moves (1x and 3x the direction vector), two quintic
//! Bézier turns to the adjacent headings, and two rotations in place.
//!
//! Swaths record, as cell offsets from the start cell, every cell the square
//! robot footprint overlaps along the motion. Rotations sweep the full
//! circumscribed disc: the robot may keep turning, so the conservative
//! envelope is the disc of radius `footprint_half_width * sqrt(2)`.
//!
//! Primitive files are plain text. All floats are written as decimals with
//! 12 significant digits and the generator quantizes its output the same
//! way, so save → load round-trips are bit-exact.

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::grid_map::CellIndex;

/// Angle-ordered lattice direction vectors; index is the heading.
pub const HEADING_DIRS: [(i32, i32); 16] = [
    (1, 0),
    (2, 1),
    (1, 1),
    (1, 2),
    (0, 1),
    (-1, 2),
    (-1, 1),
    (-2, 1),
    (-1, 0),
    (-2, -1),
    (-1, -1),
    (-1, -2),
    (0, -1),
    (1, -2),
    (1, -1),
    (2, -1),
];

pub const NUM_HEADINGS: usize = 16;

/// Heading angle in [0, 2π).
pub fn heading_angle(h: usize) -> f64 {
    let (i, j) = HEADING_DIRS[h];
    normalize_angle((j as f64).atan2(i as f64))
}

/// Wrap to [0, 2π).
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t == TAU {
        0.0
    } else {
        t
    }
}

/// Signed minimal angle difference in (-π, π].
pub fn wrap_to_pi(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// Heading index whose angle is closest to `theta` (ties to the lower index).
pub fn nearest_heading(theta: f64) -> usize {
    let mut best = 0;
    let mut best_err = f64::INFINITY;
    for h in 0..NUM_HEADINGS {
        let err = wrap_to_pi(theta - heading_angle(h)).abs();
        if err < best_err - 1e-15 {
            best_err = err;
            best = h;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MotionPrimitive {
    pub start_heading: usize,
    pub end_heading: usize,
    /// Poses relative to the start cell center, first pose (0, 0, θ_start).
    pub poses: Vec<Pose>,
    /// Covered-cell offsets from the start cell, deduplicated and sorted.
    pub swath: Vec<CellIndex>,
    /// Cells under the pose centerline, as offsets; the search requires the
    /// circumscribed radius of clearance on these so the smoother's margin
    /// formula stays well defined on every path vertex.
    pub center_cells: Vec<CellIndex>,
    /// Translation in whole cells from start to end state.
    pub end_offset: (i32, i32),
    /// Traveled xy length in meters (0 for rotation in place).
    pub length: f64,
    /// |θ_n − θ_1|, minimal-angle, radians.
    pub delta_theta: f64,
}

impl MotionPrimitive {
    pub fn n(&self) -> usize {
        self.poses.len()
    }

    pub fn is_rotation(&self) -> bool {
        self.length == 0.0
    }
}

/// Primitive-design knobs beyond resolution and footprint.
#[derive(Debug, Clone, Default)]
pub struct PrimitiveConfig {
    /// Reject turn primitives whose curvature exceeds this bound (1/m).
    pub max_curvature: Option<f64>,
    /// Also emit a reverse straight move per heading.
    pub allow_backward: bool,
}

#[derive(Debug, Clone)]
pub struct PrimitiveSet {
    pub resolution: f64,
    pub footprint_half_width: f64,
    pub primitives: Vec<MotionPrimitive>,
    by_heading: Vec<Vec<u32>>,
}

impl PrimitiveSet {
    /// Circumscribed radius of the square footprint.
    pub fn r_c(&self) -> f64 {
        self.footprint_half_width * std::f64::consts::SQRT_2
    }

    pub fn for_heading(&self, h: usize) -> impl Iterator<Item = &MotionPrimitive> {
        self.by_heading[h].iter().map(|&i| &self.primitives[i as usize])
    }

    /// Indices into `primitives` of the actions available from heading `h`.
    pub fn heading_indices(&self, h: usize) -> &[u32] {
        &self.by_heading[h]
    }

    fn index(primitives: Vec<MotionPrimitive>, resolution: f64, footprint: f64) -> Self {
        let mut by_heading = vec![Vec::new(); NUM_HEADINGS];
        for (i, p) in primitives.iter().enumerate() {
            by_heading[p.start_heading].push(i as u32);
        }
        PrimitiveSet {
            resolution,
            footprint_half_width: footprint,
            primitives,
            by_heading,
        }
    }
}

#[derive(Debug, Error)]
pub enum PrimitiveError {
    #[error("resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("primitive {name} exceeds max curvature: {kappa:.3} > {bound:.3} 1/m")]
    CurvatureBound {
        name: String,
        kappa: f64,
        bound: f64,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("unsupported primitive file version {0:?}")]
    Version(String),
    #[error("primitive file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Quantize to 12 significant decimal digits (the file precision) so that
/// in-memory values equal their serialized form exactly.
fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap()
}

fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Generate the full primitive set for one grid resolution and robot
/// footprint (square, given by its half width in meters).
pub fn generate_primitives(
    resolution: f64,
    footprint_half_width: f64,
    config: &PrimitiveConfig,
) -> Result<PrimitiveSet, PrimitiveError> {
    if !(resolution > 0.0) {
        return Err(PrimitiveError::BadResolution(resolution));
    }
    let mut primitives = Vec::new();
    for h in 0..NUM_HEADINGS {
        let (dx, dy) = HEADING_DIRS[h];
        for k in [1i32, 3] {
            primitives.push(straight_primitive(h, (k * dx, k * dy), resolution));
        }
        if config.allow_backward {
            primitives.push(straight_primitive(h, (-dx, -dy), resolution));
        }
        for step in [1i32, -1] {
            let target = (h as i32 + step).rem_euclid(NUM_HEADINGS as i32) as usize;
            primitives.push(turn_primitive(h, target, resolution, config)?);
        }
        for step in [1i32, -1] {
            let target = (h as i32 + step).rem_euclid(NUM_HEADINGS as i32) as usize;
            primitives.push(rotation_primitive(h, target));
        }
    }
    for p in &mut primitives {
        for pose in &mut p.poses {
            pose.x = round_sig12(pose.x);
            pose.y = round_sig12(pose.y);
            pose.theta = round_sig12(pose.theta);
        }
        p.length = round_sig12(p.length);
        p.delta_theta = round_sig12(p.delta_theta);
        p.swath = compute_swath(&p.poses, footprint_half_width, resolution);
        p.center_cells = centerline_cells(&p.poses, resolution);
    }
    Ok(PrimitiveSet::index(
        primitives,
        round_sig12(resolution),
        round_sig12(footprint_half_width),
    ))
}

fn straight_primitive(h: usize, cells: (i32, i32), resolution: f64) -> MotionPrimitive {
    let theta = heading_angle(h);
    let ex = cells.0 as f64 * resolution;
    let ey = cells.1 as f64 * resolution;
    let length = (ex * ex + ey * ey).sqrt();
    let steps = ((length / (resolution / 2.0)).ceil() as usize).max(1);
    let poses = (0..=steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            Pose::new(ex * t, ey * t, theta)
        })
        .collect();
    MotionPrimitive {
        start_heading: h,
        end_heading: h,
        poses,
        swath: Vec::new(),
        center_cells: Vec::new(),
        end_offset: cells,
        length,
        delta_theta: 0.0,
    }
}

fn rotation_primitive(h: usize, target: usize) -> MotionPrimitive {
    let t0 = heading_angle(h);
    let t1 = heading_angle(target);
    MotionPrimitive {
        start_heading: h,
        end_heading: target,
        poses: vec![Pose::new(0.0, 0.0, t0), Pose::new(0.0, 0.0, t1)],
        swath: Vec::new(),
        center_cells: Vec::new(),
        end_offset: (0, 0),
        length: 0.0,
        delta_theta: wrap_to_pi(t1 - t0).abs(),
    }
}

/// Quintic Bézier turn to an adjacent heading. The endpoint is the cell
/// `dir(start) + dir(end)`, whose chord sits between the two tangents.
/// Control points P1/P2 (and symmetrically P3/P4) lie on the start (end)
/// tangent line at L/3 and 2L/3, which zeroes the endpoint curvature and
/// pins the boundary headings exactly.
fn turn_primitive(
    h: usize,
    target: usize,
    resolution: f64,
    config: &PrimitiveConfig,
) -> Result<MotionPrimitive, PrimitiveError> {
    let (sx, sy) = HEADING_DIRS[h];
    let (tx, ty) = HEADING_DIRS[target];
    let end_cells = (sx + tx, sy + ty);
    let p5 = (
        end_cells.0 as f64 * resolution,
        end_cells.1 as f64 * resolution,
    );
    let t0 = heading_angle(h);
    let t1 = heading_angle(target);
    let u0 = (t0.cos(), t0.sin());
    let u1 = (t1.cos(), t1.sin());
    let chord = (p5.0 * p5.0 + p5.1 * p5.1).sqrt();
    let a = chord / 3.0;
    let ctrl = [
        (0.0, 0.0),
        (a * u0.0, a * u0.1),
        (2.0 * a * u0.0, 2.0 * a * u0.1),
        (p5.0 - 2.0 * a * u1.0, p5.1 - 2.0 * a * u1.1),
        (p5.0 - a * u1.0, p5.1 - a * u1.1),
        p5,
    ];

    // Dense evaluation for arc length, curvature check, and resampling.
    const DENSE: usize = 512;
    let mut pts: Vec<(f64, f64, f64)> = Vec::with_capacity(DENSE + 1);
    let mut cum: Vec<f64> = Vec::with_capacity(DENSE + 1);
    let mut max_kappa = 0.0f64;
    let mut total = 0.0;
    for i in 0..=DENSE {
        let t = i as f64 / DENSE as f64;
        let p = bezier_point(&ctrl, t);
        let d1 = bezier_d1(&ctrl, t);
        let d2 = bezier_d2(&ctrl, t);
        let speed_sq = d1.0 * d1.0 + d1.1 * d1.1;
        if speed_sq > 1e-18 {
            let kappa = (d1.0 * d2.1 - d1.1 * d2.0).abs() / speed_sq.powf(1.5);
            max_kappa = max_kappa.max(kappa);
        }
        if let Some(&(px, py, _)) = pts.last() {
            let (ex, ey) = (p.0 - px, p.1 - py);
            total += (ex * ex + ey * ey).sqrt();
        }
        pts.push((p.0, p.1, t));
        cum.push(total);
    }
    if let Some(bound) = config.max_curvature {
        if max_kappa > bound {
            return Err(PrimitiveError::CurvatureBound {
                name: format!("turn h{h} -> h{target}"),
                kappa: max_kappa,
                bound,
            });
        }
    }

    // Resample at <= resolution/2 arc spacing.
    let samples = ((total / (resolution / 2.0)).ceil() as usize).max(1);
    let mut poses = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let s = total * i as f64 / samples as f64;
        let t = param_at_arc(&cum, &pts, s);
        let p = bezier_point(&ctrl, t);
        let d1 = bezier_d1(&ctrl, t);
        let theta = if i == 0 {
            t0
        } else if i == samples {
            t1
        } else {
            normalize_angle(d1.1.atan2(d1.0))
        };
        poses.push(Pose::new(p.0, p.1, theta));
    }
    // Snap the endpoints onto the exact lattice coordinates.
    poses[0] = Pose::new(0.0, 0.0, t0);
    let last = poses.len() - 1;
    poses[last] = Pose::new(p5.0, p5.1, t1);

    Ok(MotionPrimitive {
        start_heading: h,
        end_heading: target,
        poses,
        swath: Vec::new(),
        center_cells: Vec::new(),
        end_offset: end_cells,
        length: total,
        delta_theta: wrap_to_pi(t1 - t0).abs(),
    })
}

fn bezier_point(p: &[(f64, f64); 6], t: f64) -> (f64, f64) {
    let u = 1.0 - t;
    let b = [
        u * u * u * u * u,
        5.0 * u * u * u * u * t,
        10.0 * u * u * u * t * t,
        10.0 * u * u * t * t * t,
        5.0 * u * t * t * t * t,
        t * t * t * t * t,
    ];
    let mut x = 0.0;
    let mut y = 0.0;
    for k in 0..6 {
        x += b[k] * p[k].0;
        y += b[k] * p[k].1;
    }
    (x, y)
}

fn bezier_d1(p: &[(f64, f64); 6], t: f64) -> (f64, f64) {
    let u = 1.0 - t;
    let b = [
        u * u * u * u,
        4.0 * u * u * u * t,
        6.0 * u * u * t * t,
        4.0 * u * t * t * t,
        t * t * t * t,
    ];
    let mut x = 0.0;
    let mut y = 0.0;
    for k in 0..5 {
        x += 5.0 * b[k] * (p[k + 1].0 - p[k].0);
        y += 5.0 * b[k] * (p[k + 1].1 - p[k].1);
    }
    (x, y)
}

fn bezier_d2(p: &[(f64, f64); 6], t: f64) -> (f64, f64) {
    let u = 1.0 - t;
    let b = [u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t];
    let mut x = 0.0;
    let mut y = 0.0;
    for k in 0..4 {
        let ddx = p[k + 2].0 - 2.0 * p[k + 1].0 + p[k].0;
        let ddy = p[k + 2].1 - 2.0 * p[k + 1].1 + p[k].1;
        x += 20.0 * b[k] * ddx;
        y += 20.0 * b[k] * ddy;
    }
    (x, y)
}

/// Parameter at a given cumulative arc length, linear interpolation over the
/// dense table.
fn param_at_arc(cum: &[f64], pts: &[(f64, f64, f64)], s: f64) -> f64 {
    match cum.binary_search_by(|c| c.total_cmp(&s)) {
        Ok(i) => pts[i].2,
        Err(i) => {
            if i == 0 {
                pts[0].2
            } else if i >= cum.len() {
                pts[pts.len() - 1].2
            } else {
                let (s0, s1) = (cum[i - 1], cum[i]);
                let (t0, t1) = (pts[i - 1].2, pts[i].2);
                if s1 > s0 {
                    t0 + (t1 - t0) * (s - s0) / (s1 - s0)
                } else {
                    t0
                }
            }
        }
    }
}

/// Cells intersecting the disc of radius `half_width * sqrt(2)` around the
/// origin cell center: the footprint envelope under arbitrary rotation, used
/// for rotation swaths and start/goal validity checks.
pub fn footprint_disc(footprint_half_width: f64, resolution: f64) -> Vec<CellIndex> {
    let r_c = footprint_half_width * std::f64::consts::SQRT_2;
    let radius_cells = (r_c / resolution).ceil() as i32 + 1;
    let mut cells = Vec::new();
    for a in -radius_cells..=radius_cells {
        for b in -radius_cells..=radius_cells {
            // Distance from the origin to the cell rectangle.
            let dx = (a.abs() as f64 * resolution - resolution / 2.0).max(0.0);
            let dy = (b.abs() as f64 * resolution - resolution / 2.0).max(0.0);
            if dx * dx + dy * dy <= r_c * r_c {
                cells.push(CellIndex::new(a, b));
            }
        }
    }
    cells
}

/// Cells traversed by the pose polyline, deduplicated and sorted. Poses sit
/// at most half a cell apart, so consecutive cells differ by at most one
/// step per axis; on diagonal steps both corner cells join the set, which
/// covers every point of the connecting segment.
pub fn centerline_cells(poses: &[Pose], resolution: f64) -> Vec<CellIndex> {
    let cell_of = |p: &Pose| {
        CellIndex::new(
            (p.x / resolution).round() as i32,
            (p.y / resolution).round() as i32,
        )
    };
    let mut cells = BTreeSet::new();
    for pair in poses.windows(2) {
        let a = cell_of(&pair[0]);
        let b = cell_of(&pair[1]);
        cells.insert(a);
        cells.insert(b);
        if a.ix != b.ix && a.iy != b.iy {
            cells.insert(CellIndex::new(a.ix, b.iy));
            cells.insert(CellIndex::new(b.ix, a.iy));
        }
    }
    if let Some(p) = poses.first() {
        cells.insert(cell_of(p));
    }
    cells.into_iter().collect()
}

/// Cells covered by the square footprint along a pose sequence, as offsets
/// from the start cell. A pure rotation sweeps the circumscribed disc.
pub fn compute_swath(
    poses: &[Pose],
    footprint_half_width: f64,
    resolution: f64,
) -> Vec<CellIndex> {
    let mut cells = BTreeSet::new();
    let displacement = poses
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(0.0, f64::max);
    if displacement < resolution * 1e-9 && poses.len() >= 2 {
        cells.extend(footprint_disc(footprint_half_width, resolution));
    } else {
        for pose in poses {
            stamp_oriented_square(&mut cells, pose, footprint_half_width, resolution);
        }
    }
    cells.into_iter().collect()
}

fn stamp_oriented_square(
    cells: &mut BTreeSet<CellIndex>,
    pose: &Pose,
    half: f64,
    resolution: f64,
) {
    let (c, s) = (pose.theta.cos(), pose.theta.sin());
    let extent = half * (c.abs() + s.abs());
    let a_min = ((pose.x - extent) / resolution - 0.5).ceil() as i32;
    let a_max = ((pose.x + extent) / resolution + 0.5).floor() as i32;
    let b_min = ((pose.y - extent) / resolution - 0.5).ceil() as i32;
    let b_max = ((pose.y + extent) / resolution + 0.5).floor() as i32;
    for b in b_min..=b_max {
        for a in a_min..=a_max {
            if cells.contains(&CellIndex::new(a, b)) {
                continue;
            }
            if square_overlaps_cell(pose, half, a, b, resolution) {
                cells.insert(CellIndex::new(a, b));
            }
        }
    }
}

/// Separating-axis test between the oriented footprint square and one cell.
/// Touching counts as overlap (conservative for collision checks).
fn square_overlaps_cell(pose: &Pose, half: f64, a: i32, b: i32, resolution: f64) -> bool {
    let (c, s) = (pose.theta.cos(), pose.theta.sin());
    let dx = a as f64 * resolution - pose.x;
    let dy = b as f64 * resolution - pose.y;
    let hc = resolution / 2.0;
    // World axes: OBB projects to half * (|cos| + |sin|).
    let obb_extent = half * (c.abs() + s.abs());
    if dx.abs() > obb_extent + hc || dy.abs() > obb_extent + hc {
        return false;
    }
    // OBB axes: cell projects to hc * (|cos| + |sin|) on both.
    let cell_extent = hc * (c.abs() + s.abs());
    let proj1 = (dx * c + dy * s).abs();
    if proj1 > half + cell_extent {
        return false;
    }
    let proj2 = (-dx * s + dy * c).abs();
    proj2 <= half + cell_extent
}

pub fn save_primitives(set: &PrimitiveSet, path: &Path) -> Result<(), PrimitiveError> {
    let mut out = String::new();
    out.push_str("version: 1\n");
    out.push_str(&format!("resolution: {}\n", fmt_sig12(set.resolution)));
    out.push_str(&format!("num_headings: {NUM_HEADINGS}\n"));
    out.push_str(&format!(
        "footprint: {}\n",
        fmt_sig12(set.footprint_half_width)
    ));
    for p in &set.primitives {
        out.push_str(&format!("start_heading: {}\n", p.start_heading));
        out.push_str(&format!("end_heading: {}\n", p.end_heading));
        out.push_str(&format!("n: {}\n", p.n()));
        for pose in &p.poses {
            out.push_str(&format!(
                "{} {} {}\n",
                fmt_sig12(pose.x),
                fmt_sig12(pose.y),
                fmt_sig12(pose.theta)
            ));
        }
        for cell in &p.swath {
            out.push_str(&format!("{} {}\n", cell.ix, cell.iy));
        }
    }
    fs::write(path, out).map_err(|source| PrimitiveError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_primitives(path: &Path) -> Result<PrimitiveSet, PrimitiveError> {
    let text = fs::read_to_string(path).map_err(|source| PrimitiveError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_primitives(&text)
}

pub fn parse_primitives(text: &str) -> Result<PrimitiveSet, PrimitiveError> {
    let mut lines = text.lines().enumerate().peekable();
    let mut header = |key: &str| -> Result<String, PrimitiveError> {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| PrimitiveError::Parse {
                line: 0,
                msg: "unexpected end of file in header".into(),
            })?;
        let (k, v) = line.split_once(':').ok_or_else(|| PrimitiveError::Parse {
            line: lineno + 1,
            msg: format!("expected `{key}: value`"),
        })?;
        if k.trim() != key {
            return Err(PrimitiveError::Parse {
                line: lineno + 1,
                msg: format!("expected key {key:?}, got {:?}", k.trim()),
            });
        }
        Ok(v.trim().to_string())
    };
    let version = header("version")?;
    if version != "1" {
        return Err(PrimitiveError::Version(version));
    }
    let resolution: f64 = header("resolution")?
        .parse()
        .map_err(|_| PrimitiveError::Parse {
            line: 2,
            msg: "bad resolution".into(),
        })?;
    let num_headings: usize = header("num_headings")?
        .parse()
        .map_err(|_| PrimitiveError::Parse {
            line: 3,
            msg: "bad num_headings".into(),
        })?;
    if num_headings != NUM_HEADINGS {
        return Err(PrimitiveError::Parse {
            line: 3,
            msg: format!("expected {NUM_HEADINGS} headings, file has {num_headings}"),
        });
    }
    let footprint: f64 = header("footprint")?
        .parse()
        .map_err(|_| PrimitiveError::Parse {
            line: 4,
            msg: "bad footprint".into(),
        })?;

    let mut primitives = Vec::new();
    while lines.peek().is_some() {
        let parse_key = |lines: &mut std::iter::Peekable<
            std::iter::Enumerate<std::str::Lines<'_>>,
        >,
                         key: &str|
         -> Result<(usize, String), PrimitiveError> {
            let (lineno, line) = lines.next().ok_or_else(|| PrimitiveError::Parse {
                line: 0,
                msg: format!("unexpected end of file, wanted {key}"),
            })?;
            let (k, v) = line.split_once(':').ok_or_else(|| PrimitiveError::Parse {
                line: lineno + 1,
                msg: format!("expected `{key}: value`, got {line:?}"),
            })?;
            if k.trim() != key {
                return Err(PrimitiveError::Parse {
                    line: lineno + 1,
                    msg: format!("expected key {key:?}, got {:?}", k.trim()),
                });
            }
            Ok((lineno + 1, v.trim().to_string()))
        };
        let (line, sh) = parse_key(&mut lines, "start_heading")?;
        let start_heading: usize = sh.parse().map_err(|_| PrimitiveError::Parse {
            line,
            msg: "bad start_heading".into(),
        })?;
        let (line, eh) = parse_key(&mut lines, "end_heading")?;
        let end_heading: usize = eh.parse().map_err(|_| PrimitiveError::Parse {
            line,
            msg: "bad end_heading".into(),
        })?;
        if start_heading >= NUM_HEADINGS || end_heading >= NUM_HEADINGS {
            return Err(PrimitiveError::Parse {
                line,
                msg: "heading index out of range".into(),
            });
        }
        let (line, ns) = parse_key(&mut lines, "n")?;
        let n: usize = ns.parse().map_err(|_| PrimitiveError::Parse {
            line,
            msg: "bad pose count".into(),
        })?;
        if n < 2 {
            return Err(PrimitiveError::Parse {
                line,
                msg: format!("primitive must have at least 2 poses, got {n}"),
            });
        }
        let mut poses = Vec::with_capacity(n);
        for _ in 0..n {
            let (lineno, l) = lines.next().ok_or(PrimitiveError::Parse {
                line: 0,
                msg: "truncated pose block".into(),
            })?;
            let vals: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| PrimitiveError::Parse {
                    line: lineno + 1,
                    msg: format!("bad pose line {l:?}"),
                })?;
            if vals.len() != 3 {
                return Err(PrimitiveError::Parse {
                    line: lineno + 1,
                    msg: format!("pose line needs 3 values, got {}", vals.len()),
                });
            }
            poses.push(Pose {
                x: vals[0],
                y: vals[1],
                theta: vals[2],
            });
        }
        // Swath lines (2 integer columns) run until the next block or EOF.
        let mut swath = Vec::new();
        while let Some(&(_, l)) = lines.peek() {
            if l.contains(':') {
                break;
            }
            let (lineno, l) = lines.next().unwrap();
            let vals: Vec<i32> = l
                .split_whitespace()
                .map(|t| t.parse::<i32>())
                .collect::<Result<_, _>>()
                .map_err(|_| PrimitiveError::Parse {
                    line: lineno + 1,
                    msg: format!("bad swath line {l:?}"),
                })?;
            if vals.len() != 2 {
                return Err(PrimitiveError::Parse {
                    line: lineno + 1,
                    msg: format!("swath line needs 2 values, got {}", vals.len()),
                });
            }
            swath.push(CellIndex::new(vals[0], vals[1]));
        }
        if swath.is_empty() {
            return Err(PrimitiveError::Parse {
                line: 0,
                msg: "primitive block has no swath cells".into(),
            });
        }
        let last = poses[poses.len() - 1];
        let length: f64 = poses
            .windows(2)
            .map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt())
            .sum();
        let end_offset = (
            (last.x / resolution).round() as i32,
            (last.y / resolution).round() as i32,
        );
        let center_cells = centerline_cells(&poses, resolution);
        primitives.push(MotionPrimitive {
            start_heading,
            end_heading,
            poses,
            swath,
            center_cells,
            end_offset,
            length: if end_offset == (0, 0) { 0.0 } else { round_sig12(length) },
            delta_theta: round_sig12(wrap_to_pi(last.theta - heading_angle(start_heading)).abs()),
        });
    }
    Ok(PrimitiveSet::index(primitives, resolution, footprint))
}
