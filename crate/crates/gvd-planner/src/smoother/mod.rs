//! Convex QP path smoothing with per-vertex bubble boxes.
//!
//! The searched path is resampled at 0.1 m into a reference path. Each
//! vertex carries its obstacle clearance `d_i` and the optimization margin
//!
//! ```text
//! b_i = (sqrt(2)/2) d_i - r_c   when positive, else 0
//! ```
//!
//! which is the half side of the inscribed square of the clearance circle,
//! shrunk by the robot's circumscribed radius. The smoother minimizes
//!
//! ```text
//! w_s Σ ||x_{i+1} - 2 x_i + x_{i-1}||²  +  w_r Σ ||x_i - x_i_ref||²
//! ```
//!
//! with endpoints pinned and every interior vertex confined to its box,
//! so any solution stays at least `r_c` from the obstacles the reference
//! saw. Vertices whose margin is zero are frozen at the reference.

pub mod solver;

use thiserror::Error;

use crate::gvd::GvdMap;
use crate::primitives::Pose;
pub use solver::{solve_box_qp, BandMatrix, BoxQp, SolveStats, SolveStatus, SolverError, SolverOptions};

/// Reference-path sampling interval, meters.
pub const SAMPLE_SPACING: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SmootherError {
    #[error("path too short to smooth: {0:.3} m of arc length")]
    TooShort(f64),
    #[error("need at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error(
        "reference vertex {index} at ({x:.3}, {y:.3}) clears obstacles by {clearance:.3} m, below the circumscribed radius {r_c:.3} m"
    )]
    Integrity {
        index: usize,
        x: f64,
        y: f64,
        clearance: f64,
        r_c: f64,
    },
    #[error("vertex ({x:.3}, {y:.3}) is outside the map")]
    OffMap { x: f64, y: f64 },
    #[error("weights must satisfy w_s > 0 and w_r >= 0 (got w_s={w_s}, w_r={w_r})")]
    BadWeights { w_s: f64, w_r: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Resampled search path plus per-vertex clearances and margins.
#[derive(Debug, Clone)]
pub struct ReferencePath {
    pub vertices: Vec<[f64; 2]>,
    /// Obstacle clearance of the cell under each vertex, meters.
    pub clearances: Vec<f64>,
    /// Per-vertex half box side; zero freezes the vertex.
    pub margins: Vec<f64>,
    pub r_c: f64,
    /// Actual spacing after rounding the sample count, meters.
    pub spacing: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SmootherConfig {
    pub w_s: f64,
    pub w_r: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        SmootherConfig {
            w_s: 10.0,
            w_r: 1.0,
            tolerance: 1e-6,
            max_iterations: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmoothedPath {
    pub vertices: Vec<[f64; 2]>,
    pub stats: SolveStats,
}

impl SmoothedPath {
    /// `x y` text lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("{:.9} {:.9}\n", v[0], v[1]));
        }
        out
    }
}

/// Resample the searched path at [`SAMPLE_SPACING`] (both endpoints
/// included) and attach clearances and margins from the distance map.
pub fn build_reference(
    search_path: &[Pose],
    gvd: &GvdMap,
    r_c: f64,
) -> Result<ReferencePath, SmootherError> {
    let pts: Vec<[f64; 2]> = search_path.iter().map(|p| [p.x, p.y]).collect();
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        cum.push(cum.last().unwrap() + d);
    }
    let total = *cum.last().unwrap();
    if total < 2.0 * SAMPLE_SPACING {
        return Err(SmootherError::TooShort(total));
    }
    let n = ((total / SAMPLE_SPACING).round() as usize).max(2) + 1;
    let spacing = total / (n - 1) as f64;
    let mut vertices = Vec::with_capacity(n);
    let mut seg = 0usize;
    for i in 0..n {
        let s = if i + 1 == n { total } else { i as f64 * spacing };
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        vertices.push([
            pts[seg][0] + t * (pts[seg + 1][0] - pts[seg][0]),
            pts[seg][1] + t * (pts[seg + 1][1] - pts[seg][1]),
        ]);
    }

    let mut clearances = Vec::with_capacity(n);
    let mut margins = Vec::with_capacity(n);
    for (index, v) in vertices.iter().enumerate() {
        let cell = gvd
            .world_to_cell(v[0], v[1])
            .ok_or(SmootherError::OffMap { x: v[0], y: v[1] })?;
        let d = gvd.clearance_at(cell);
        if d < r_c {
            return Err(SmootherError::Integrity {
                index,
                x: v[0],
                y: v[1],
                clearance: d,
                r_c,
            });
        }
        clearances.push(d);
        margins.push((std::f64::consts::SQRT_2 / 2.0 * d - r_c).max(0.0));
    }
    Ok(ReferencePath {
        vertices,
        clearances,
        margins,
        r_c,
        spacing,
    })
}

/// Eq-style objective value of a candidate vertex list against a reference.
pub fn objective(cfg: &SmootherConfig, reference: &[[f64; 2]], vertices: &[[f64; 2]]) -> f64 {
    let mut smooth = 0.0;
    for i in 1..vertices.len() - 1 {
        let ddx = vertices[i + 1][0] - 2.0 * vertices[i][0] + vertices[i - 1][0];
        let ddy = vertices[i + 1][1] - 2.0 * vertices[i][1] + vertices[i - 1][1];
        smooth += ddx * ddx + ddy * ddy;
    }
    let mut dev = 0.0;
    for (v, r) in vertices.iter().zip(reference) {
        dev += (v[0] - r[0]).powi(2) + (v[1] - r[1]).powi(2);
    }
    cfg.w_s * smooth + cfg.w_r * dev
}

/// Assemble the 2n-dimensional box QP: quadratic term `2 (w_s D'D + w_r I)`
/// with D the blockwise second-difference operator, linear term
/// `-2 w_r x_ref`, endpoint equality as equal bounds, interior boxes from
/// the margins. Coordinates interleave as (x0, y0, x1, y1, ...).
pub fn assemble_qp(reference: &ReferencePath, cfg: &SmootherConfig) -> Result<BoxQp, SmootherError> {
    let n = reference.vertices.len();
    if n < 3 {
        return Err(SmootherError::TooFewVertices(n));
    }
    if !(cfg.w_s > 0.0) || !(cfg.w_r >= 0.0) {
        return Err(SmootherError::BadWeights {
            w_s: cfg.w_s,
            w_r: cfg.w_r,
        });
    }
    let dim = 2 * n;
    let mut quad = BandMatrix::zeros(dim, 4);
    // Accumulate D'D per vertex pair, then scatter onto both coordinates.
    // Row r of D touches vertices (r-1, r, r+1) with weights (1, -2, 1).
    for r in 1..n - 1 {
        let entries = [(r - 1, 1.0), (r, -2.0), (r + 1, 1.0)];
        for (a, ca) in entries {
            for (b, cb) in entries {
                if b >= a {
                    let v = 2.0 * cfg.w_s * ca * cb;
                    quad.add(2 * a, 2 * (b - a), v);
                    quad.add(2 * a + 1, 2 * (b - a), v);
                }
            }
        }
    }
    for i in 0..dim {
        quad.add(i, 0, 2.0 * cfg.w_r);
    }
    let mut linear = Vec::with_capacity(dim);
    let mut lower = Vec::with_capacity(dim);
    let mut upper = Vec::with_capacity(dim);
    for (i, v) in reference.vertices.iter().enumerate() {
        let b = if i == 0 || i + 1 == n {
            0.0
        } else {
            reference.margins[i]
        };
        for axis in 0..2 {
            linear.push(-2.0 * cfg.w_r * v[axis]);
            lower.push(v[axis] - b);
            upper.push(v[axis] + b);
        }
    }
    Ok(BoxQp {
        quad,
        linear,
        lower,
        upper,
    })
}

/// Smooth the reference path. On iteration exhaustion the best feasible
/// iterate is returned with `MaxIterations` status rather than an error.
pub fn smooth(reference: &ReferencePath, cfg: &SmootherConfig) -> Result<SmoothedPath, SmootherError> {
    let qp = assemble_qp(reference, cfg)?;
    let warm: Vec<f64> = reference.vertices.iter().flatten().copied().collect();
    let opts = SolverOptions {
        tolerance: cfg.tolerance,
        max_iterations: cfg.max_iterations,
        ..Default::default()
    };
    let (solution, stats) = solve_box_qp(&qp, Some(&warm), &opts)?;
    let vertices = solution.chunks(2).map(|c| [c[0], c[1]]).collect();
    Ok(SmoothedPath { vertices, stats })
}
