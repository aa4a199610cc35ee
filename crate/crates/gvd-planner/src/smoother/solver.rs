//! Embedded box-constrained QP solver.
//!
//! Minimizes `1/2 x'Qx + c'x` subject to `l <= x <= u` with over-relaxed
//! alternating projections (ADMM splitting between the quadratic objective
//! and the box). The x-update solves `(Q + rho I) x = rhs` through a banded
//! Cholesky factorization, so each iteration is linear in the problem size.
//! The penalty starts at 1.0 and is rebalanced against the primal/dual
//! residual ratio every 25 iterations, refactorizing on change.
//!
//! Equality-pinned coordinates are expressed as `l = u`; projection makes
//! every `z` iterate feasible, so the returned point satisfies the bounds
//! exactly and optimality is certified by the projected gradient.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("QP contains non-finite data in {0}")]
    NonFinite(&'static str),
    #[error("bound lower[{0}] exceeds upper[{0}]")]
    InvertedBounds(usize),
    #[error("band matrix dimension mismatch")]
    Shape,
}

/// Symmetric band matrix; `bands[d][i] = A[i][i + d]` for `d <= bandwidth`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bands: Vec<Vec<f64>>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        let bands = (0..=bandwidth).map(|d| vec![0.0; n - d.min(n)]).collect();
        BandMatrix { n, bands }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    /// Add `v` at symmetric positions (i, i+d) and (i+d, i).
    pub fn add(&mut self, i: usize, d: usize, v: f64) {
        self.bands[d][i] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d >= self.bands.len() {
            0.0
        } else {
            self.bands[d][lo]
        }
    }

    /// y = A x + b
    pub fn mul_add(&self, x: &[f64], b: &[f64], y: &mut [f64]) {
        y.copy_from_slice(b);
        for (d, band) in self.bands.iter().enumerate() {
            if d == 0 {
                for i in 0..band.len() {
                    y[i] += band[i] * x[i];
                }
            } else {
                for i in 0..band.len() {
                    y[i] += band[i] * x[i + d];
                    y[i + d] += band[i] * x[i];
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                a[i][j] = self.get(i, j);
            }
        }
        a
    }

    fn all_finite(&self) -> bool {
        self.bands.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// Banded Cholesky factor (lower), same bandwidth as the source matrix.
struct BandCholesky {
    n: usize,
    bw: usize,
    /// `l[i * (bw + 1) + d] = L[i][i - d]`, d <= min(i, bw).
    l: Vec<f64>,
}

impl BandCholesky {
    fn factor(a: &BandMatrix, shift: f64) -> Self {
        let n = a.n;
        let bw = a.bandwidth();
        let stride = bw + 1;
        let mut l = vec![0.0; n * stride];
        for j in 0..n {
            let lo = j.saturating_sub(bw);
            let mut sum = a.get(j, j) + shift;
            for k in lo..j {
                let v = l[j * stride + (j - k)];
                sum -= v * v;
            }
            let diag = sum.max(1e-300).sqrt();
            l[j * stride] = diag;
            for i in j + 1..(j + bw + 1).min(n) {
                let mut s = a.get(i, j);
                let lo_i = i.saturating_sub(bw);
                for k in lo_i.max(lo)..j {
                    s -= l[i * stride + (i - k)] * l[j * stride + (j - k)];
                }
                l[i * stride + (i - j)] = s / diag;
            }
        }
        BandCholesky { n, bw, l }
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let stride = self.bw + 1;
        x.copy_from_slice(b);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut v = x[i];
            for k in lo..i {
                v -= self.l[i * stride + (i - k)] * x[k];
            }
            x[i] = v / self.l[i * stride];
        }
        for i in (0..self.n).rev() {
            let mut v = x[i];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                v -= self.l[k * stride + (k - i)] * x[k];
            }
            x[i] = v / self.l[i * stride];
        }
    }
}

/// Box-constrained QP: `min 1/2 x'Qx + c'x` with `l <= x <= u`.
#[derive(Debug, Clone)]
pub struct BoxQp {
    pub quad: BandMatrix,
    pub linear: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxQp {
    pub fn n(&self) -> usize {
        self.linear.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut qx = vec![0.0; x.len()];
        self.quad.mul_add(x, &vec![0.0; x.len()], &mut qx);
        0.5 * dot(&qx, x) + dot(&self.linear, x)
    }

    fn validate(&self) -> Result<(), SolverError> {
        if self.linear.len() != self.quad.n()
            || self.lower.len() != self.quad.n()
            || self.upper.len() != self.quad.n()
        {
            return Err(SolverError::Shape);
        }
        if !self.quad.all_finite() {
            return Err(SolverError::NonFinite("quadratic term"));
        }
        if self.linear.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite("linear term"));
        }
        for i in 0..self.n() {
            if self.lower[i].is_nan() || self.upper[i].is_nan() {
                return Err(SolverError::NonFinite("bounds"));
            }
            if self.lower[i] > self.upper[i] {
                return Err(SolverError::InvertedBounds(i));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub status: SolveStatus,
    pub iterations: usize,
    /// Infinity norm of the projected gradient at the returned point.
    pub projected_gradient: f64,
    /// Objective value at the returned point.
    pub objective: f64,
    /// Best objective seen after each iteration; nonincreasing.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub penalty: f64,
    pub over_relaxation: f64,
    pub rebalance_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-6,
            max_iterations: 4000,
            penalty: 1.0,
            over_relaxation: 1.6,
            rebalance_every: 25,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn clamp_into(x: &[f64], lower: &[f64], upper: &[f64], out: &mut [f64]) {
    for i in 0..x.len() {
        out[i] = x[i].clamp(lower[i], upper[i]);
    }
}

/// Infinity norm of the projected gradient of a feasible point `z`.
fn projected_gradient_norm(qp: &BoxQp, z: &[f64], grad: &mut [f64]) -> f64 {
    qp.quad.mul_add(z, &qp.linear, grad);
    let mut norm = 0.0f64;
    for i in 0..z.len() {
        let at_lower = z[i] <= qp.lower[i];
        let at_upper = z[i] >= qp.upper[i];
        let pg = if at_lower && at_upper {
            0.0 // equality-pinned coordinate
        } else if at_lower {
            grad[i].min(0.0)
        } else if at_upper {
            grad[i].max(0.0)
        } else {
            grad[i]
        };
        norm = norm.max(pg.abs());
    }
    norm
}

/// Solve the box QP; `warm_start`, when given, seeds both splitting copies.
pub fn solve_box_qp(
    qp: &BoxQp,
    warm_start: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveStats), SolverError> {
    qp.validate()?;
    let n = qp.n();
    let mut rho = opts.penalty;
    let alpha = opts.over_relaxation;
    let mut chol = BandCholesky::factor(&qp.quad, rho);

    let mut z = vec![0.0; n];
    match warm_start {
        Some(w) if w.len() == n => clamp_into(w, &qp.lower, &qp.upper, &mut z),
        _ => clamp_into(&vec![0.0; n], &qp.lower, &qp.upper, &mut z),
    }
    let mut x = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut z_prev = vec![0.0; n];

    let mut best = z.clone();
    let mut best_obj = qp.objective(&z);
    let mut trace = Vec::with_capacity(64.min(opts.max_iterations));
    trace.push(best_obj);

    let mut pg = projected_gradient_norm(qp, &z, &mut grad);
    if pg <= opts.tolerance {
        return Ok((
            z.clone(),
            SolveStats {
                status: SolveStatus::Solved,
                iterations: 0,
                projected_gradient: pg,
                objective: best_obj,
                objective_trace: trace,
            },
        ));
    }

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        // x-update: (Q + rho I) x = rho (z - u) - c
        for i in 0..n {
            rhs[i] = rho * (z[i] - u[i]) - qp.linear[i];
        }
        chol.solve(&rhs, &mut x);
        // Over-relaxation, projection, dual update.
        z_prev.copy_from_slice(&z);
        for i in 0..n {
            let xh = alpha * x[i] + (1.0 - alpha) * z[i];
            z[i] = (xh + u[i]).clamp(qp.lower[i], qp.upper[i]);
            u[i] += xh - z[i];
        }

        let obj = qp.objective(&z);
        if obj < best_obj {
            best_obj = obj;
            best.copy_from_slice(&z);
        }
        trace.push(best_obj);

        pg = projected_gradient_norm(qp, &z, &mut grad);
        if pg <= opts.tolerance {
            return Ok((
                z,
                SolveStats {
                    status: SolveStatus::Solved,
                    iterations,
                    projected_gradient: pg,
                    objective: obj,
                    objective_trace: trace,
                },
            ));
        }

        if opts.rebalance_every > 0 && iterations % opts.rebalance_every == 0 {
            let mut r_primal = 0.0f64;
            let mut r_dual = 0.0f64;
            for i in 0..n {
                r_primal = r_primal.max((x[i] - z[i]).abs());
                r_dual = r_dual.max(rho * (z[i] - z_prev[i]).abs());
            }
            let mut new_rho = rho;
            if r_primal > 10.0 * r_dual {
                new_rho = (rho * 2.0).min(1e6);
            } else if r_dual > 10.0 * r_primal {
                new_rho = (rho / 2.0).max(1e-6);
            }
            if new_rho != rho {
                // Dual variables are scaled duals (y / rho): rescale.
                let scale = rho / new_rho;
                for ui in u.iter_mut() {
                    *ui *= scale;
                }
                rho = new_rho;
                chol = BandCholesky::factor(&qp.quad, rho);
            }
        }
    }

    let pg_best = projected_gradient_norm(qp, &best, &mut grad);
    Ok((
        best,
        SolveStats {
            status: SolveStatus::MaxIterations,
            iterations,
            projected_gradient: pg_best,
            objective: best_obj,
            objective_trace: trace,
        },
    ))
}
