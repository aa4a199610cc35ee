//! Cubic-spline path resampling and time-optimal velocity profiling.
//!
//! The smoothed vertices are interpolated with a natural cubic spline over
//! the chord-length parameter, per axis. Arc length comes from adaptive
//! 5-point Gauss-Legendre quadrature. The velocity planner samples the
//! spline at a fixed arc step, caps speed by `v_max` and by the
//! curvature-coupled angular limit `omega_max / |kappa|`, then runs a
//! forward and a backward integration pass under the acceleration bound;
//! the pointwise minimum of the passes is the maximal feasible profile.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("spline needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("duplicate consecutive vertices at index {0}")]
    DegenerateKnot(usize),
    #[error("zero-speed parameter point at t = {0}")]
    Singularity(f64),
    #[error("sample step must be positive, got {0}")]
    BadStep(f64),
    #[error("{which} speed {v:.3} m/s exceeds the local cap {cap:.3} m/s")]
    InfeasibleBoundary {
        which: &'static str,
        v: f64,
        cap: f64,
    },
    #[error("profile stalls at interior sample {0}")]
    Stalled(usize),
}

/// Velocity, angular velocity, and acceleration bounds.
#[derive(Debug, Clone, Copy)]
pub struct MotionLimits {
    pub v_max: f64,
    pub omega_max: f64,
    pub a_max: f64,
}

/// Natural cubic spline through the smoothed vertices, chord-length
/// parameterized, with a piecewise arc-length table for inversion.
#[derive(Debug, Clone)]
pub struct PathSpline {
    knots: Vec<f64>,
    x: AxisSpline,
    y: AxisSpline,
    /// Adaptive quadrature pieces: (t0, t1, cumulative arc at t1).
    arc_pieces: Vec<(f64, f64, f64)>,
    total_arc: f64,
}

#[derive(Debug, Clone)]
struct AxisSpline {
    values: Vec<f64>,
    /// Second derivatives at the knots; natural ends are zero.
    m: Vec<f64>,
}

impl AxisSpline {
    fn fit(knots: &[f64], values: Vec<f64>) -> Self {
        let n = values.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior tridiagonal system.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0;
            }
            for i in 1..k {
                let h0 = knots[i + 1] - knots[i];
                let w = h0 / 6.0 / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        AxisSpline { values, m }
    }

    fn eval(&self, knots: &[f64], seg: usize, t: f64) -> (f64, f64, f64) {
        let h = knots[seg + 1] - knots[seg];
        let a = (knots[seg + 1] - t) / h;
        let b = (t - knots[seg]) / h;
        let (y0, y1) = (self.values[seg], self.values[seg + 1]);
        let (m0, m1) = (self.m[seg], self.m[seg + 1]);
        let pos = a * y0
            + b * y1
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h + h / 6.0 * ((3.0 * b * b - 1.0) * m1 - (3.0 * a * a - 1.0) * m0);
        let d2 = a * m0 + b * m1;
        (pos, d1, d2)
    }
}

const GAUSS5_NODES: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

impl PathSpline {
    pub fn total_length(&self) -> f64 {
        self.total_arc
    }

    pub fn domain_end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    fn segment_of(&self, t: f64) -> usize {
        match self
            .knots
            .binary_search_by(|k| k.total_cmp(&t))
        {
            Ok(i) => i.min(self.knots.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.knots.len() - 2),
        }
    }

    /// Position at parameter t.
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        let seg = self.segment_of(t);
        (
            self.x.eval(&self.knots, seg, t).0,
            self.y.eval(&self.knots, seg, t).0,
        )
    }

    fn derivatives_at(&self, t: f64) -> (f64, f64, f64, f64) {
        let seg = self.segment_of(t);
        let (_, dx, ddx) = self.x.eval(&self.knots, seg, t);
        let (_, dy, ddy) = self.y.eval(&self.knots, seg, t);
        (dx, dy, ddx, ddy)
    }

    fn speed_at(&self, t: f64) -> f64 {
        let (dx, dy, _, _) = self.derivatives_at(t);
        (dx * dx + dy * dy).sqrt()
    }

    /// Parameter value at a given arc length from the start.
    pub fn param_at_arc(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total_arc);
        let idx = self
            .arc_pieces
            .partition_point(|&(_, _, cum)| cum < s)
            .min(self.arc_pieces.len() - 1);
        let (t0, t1, cum_end) = self.arc_pieces[idx];
        let cum_start = if idx == 0 {
            0.0
        } else {
            self.arc_pieces[idx - 1].2
        };
        let want = s - cum_start;
        if cum_end - cum_start <= 0.0 {
            return t0;
        }
        // Bisection on the partial integral within the converged piece.
        let (mut lo, mut hi) = (t0, t1);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if gauss5(|t| self.speed_at(t), t0, mid) < want {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn gauss5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GAUSS5_NODES
        .iter()
        .zip(&GAUSS5_WEIGHTS)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn adaptive_arc(
    spline: &PathSpline,
    a: f64,
    b: f64,
    tol: f64,
    pieces: &mut Vec<(f64, f64, f64)>,
    depth: usize,
) -> f64 {
    let whole = gauss5(|t| spline.speed_at(t), a, b);
    let mid = 0.5 * (a + b);
    let left = gauss5(|t| spline.speed_at(t), a, mid);
    let right = gauss5(|t| spline.speed_at(t), mid, b);
    if depth >= 24 || (left + right - whole).abs() <= tol {
        let refined = left + right;
        pieces.push((a, b, refined));
        refined
    } else {
        adaptive_arc(spline, a, mid, tol / 2.0, pieces, depth + 1)
            + adaptive_arc(spline, mid, b, tol / 2.0, pieces, depth + 1)
    }
}

/// Interpolating natural cubic spline through the path vertices.
pub fn fit_spline(vertices: &[[f64; 2]]) -> Result<PathSpline, TrajectoryError> {
    if vertices.len() < 3 {
        return Err(TrajectoryError::TooFewVertices(vertices.len()));
    }
    let mut knots = Vec::with_capacity(vertices.len());
    knots.push(0.0);
    for (i, w) in vertices.windows(2).enumerate() {
        let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        if d == 0.0 {
            return Err(TrajectoryError::DegenerateKnot(i + 1));
        }
        knots.push(knots[i] + d);
    }
    let xs: Vec<f64> = vertices.iter().map(|v| v[0]).collect();
    let ys: Vec<f64> = vertices.iter().map(|v| v[1]).collect();
    let x = AxisSpline::fit(&knots, xs);
    let y = AxisSpline::fit(&knots, ys);
    let mut spline = PathSpline {
        knots,
        x,
        y,
        arc_pieces: Vec::new(),
        total_arc: 0.0,
    };
    let mut pieces = Vec::new();
    let mut total = 0.0;
    for seg in 0..spline.knots.len() - 1 {
        total += adaptive_arc(
            &spline,
            spline.knots[seg],
            spline.knots[seg + 1],
            1e-9,
            &mut pieces,
            0,
        );
    }
    let mut cum = 0.0;
    for p in pieces.iter_mut() {
        cum += p.2;
        p.2 = cum;
    }
    spline.arc_pieces = pieces;
    spline.total_arc = total;
    Ok(spline)
}

/// Unsigned curvature at parameter t: `|x'y'' - y'x''| / (x'^2 + y'^2)^1.5`.
pub fn curvature_at(spline: &PathSpline, t: f64) -> Result<f64, TrajectoryError> {
    let (dx, dy, ddx, ddy) = spline.derivatives_at(t);
    let speed_sq = dx * dx + dy * dy;
    if speed_sq < 1e-18 {
        return Err(TrajectoryError::Singularity(t));
    }
    Ok((dx * ddy - dy * ddx).abs() / speed_sq.powf(1.5))
}

/// Feasible maximal velocity profile along the spline.
#[derive(Debug, Clone)]
pub struct VelocityProfile {
    /// (arc length, speed) samples, uniformly spaced in arc length.
    pub samples: Vec<(f64, f64)>,
    pub limits: MotionLimits,
    pub v_start: f64,
    pub v_end: f64,
}

impl VelocityProfile {
    pub fn step(&self) -> f64 {
        if self.samples.len() > 1 {
            self.samples[1].0 - self.samples[0].0
        } else {
            0.0
        }
    }

    /// Time spent in each inter-sample interval (trapezoidal in speed).
    pub fn interval_times(&self) -> Result<Vec<f64>, TrajectoryError> {
        let ds = self.step();
        self.samples
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let vsum = w[0].1 + w[1].1;
                if vsum <= 0.0 {
                    Err(TrajectoryError::Stalled(i))
                } else {
                    Ok(2.0 * ds / vsum)
                }
            })
            .collect()
    }

    pub fn total_time(&self) -> Result<f64, TrajectoryError> {
        Ok(self.interval_times()?.iter().sum())
    }

    /// CSV rows `s,v,t_cumulative`.
    pub fn to_csv(&self) -> Result<String, TrajectoryError> {
        let times = self.interval_times()?;
        let mut out = String::from("s,v,t_cumulative\n");
        let mut t = 0.0;
        for (i, (s, v)) in self.samples.iter().enumerate() {
            if i > 0 {
                t += times[i - 1];
            }
            let _ = writeln!(out, "{s:.6},{v:.6},{t:.6}");
        }
        Ok(out)
    }
}

/// Sample the spline every `ds` meters of arc and build the maximal profile
/// between the boundary speeds.
pub fn plan_velocity(
    spline: &PathSpline,
    limits: &MotionLimits,
    v_start: f64,
    v_end: f64,
    ds: f64,
) -> Result<VelocityProfile, TrajectoryError> {
    if !(ds > 0.0) {
        return Err(TrajectoryError::BadStep(ds));
    }
    let total = spline.total_length();
    let m = ((total / ds).ceil() as usize).max(1);
    let step = total / m as f64;
    let mut samples = Vec::with_capacity(m + 1);
    let mut caps = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let s = step * k as f64;
        let t = spline.param_at_arc(s);
        let kappa = curvature_at(spline, t)?;
        let cap = if kappa > 0.0 {
            limits.v_max.min(limits.omega_max / kappa)
        } else {
            limits.v_max
        };
        samples.push(s);
        caps.push(cap);
    }
    if v_start > caps[0] + 1e-9 {
        return Err(TrajectoryError::InfeasibleBoundary {
            which: "start",
            v: v_start,
            cap: caps[0],
        });
    }
    if v_end > caps[m] + 1e-9 {
        return Err(TrajectoryError::InfeasibleBoundary {
            which: "end",
            v: v_end,
            cap: caps[m],
        });
    }
    let mut v = caps.clone();
    // Forward pass from the start speed.
    v[0] = v_start;
    for k in 0..m {
        let reach = (v[k] * v[k] + 2.0 * limits.a_max * step).sqrt();
        v[k + 1] = v[k + 1].min(reach);
    }
    if v_end > v[m] + 1e-9 {
        return Err(TrajectoryError::InfeasibleBoundary {
            which: "end",
            v: v_end,
            cap: v[m],
        });
    }
    // Backward pass to the end speed.
    v[m] = v_end;
    for k in (0..m).rev() {
        let reach = (v[k + 1] * v[k + 1] + 2.0 * limits.a_max * step).sqrt();
        v[k] = v[k].min(reach);
    }
    if v[0] + 1e-9 < v_start {
        return Err(TrajectoryError::InfeasibleBoundary {
            which: "start",
            v: v_start,
            cap: v[0],
        });
    }
    v[0] = v_start;
    Ok(VelocityProfile {
        samples: samples.into_iter().zip(v).collect(),
        limits: *limits,
        v_start,
        v_end,
    })
}

/// Travel distance, traversal time, and curvature statistics.
#[derive(Debug, Clone, Copy)]
pub struct PathMetrics {
    pub s: f64,
    pub t: f64,
    pub k_max: f64,
    pub k_mean: f64,
}

impl PathMetrics {
    pub fn csv_header() -> &'static str {
        "S,T,K_max,K_mean"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.6},{:.6}",
            self.s, self.t, self.k_max, self.k_mean
        )
    }
}

/// Metrics over a profiled spline; curvature is sampled four times denser
/// than the profile.
pub fn compute_metrics(
    spline: &PathSpline,
    profile: &VelocityProfile,
) -> Result<PathMetrics, TrajectoryError> {
    let t = profile.total_time()?;
    let s = spline.total_length();
    let ds = profile.step() / 4.0;
    let m = ((s / ds).ceil() as usize).max(1);
    let mut k_max = 0.0f64;
    let mut k_sum = 0.0f64;
    for k in 0..=m {
        let arc = s * k as f64 / m as f64;
        let kappa = curvature_at(spline, spline.param_at_arc(arc))?;
        k_max = k_max.max(kappa);
        k_sum += kappa;
    }
    Ok(PathMetrics {
        s,
        t,
        k_max,
        k_mean: k_sum / (m + 1) as f64,
    })
}
