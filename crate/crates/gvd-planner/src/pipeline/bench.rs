//! Scenario benchmark runner: repeated paired corridor/full runs with
//! per-repetition metrics rows and aggregate statistics.

use std::fmt::Write as _;

use super::{plan_end_to_end, Mode, Scenario};

/// One pipeline run. Timing columns sit at the end so the deterministic
/// prefix can be compared across runs.
#[derive(Debug, Clone)]
pub struct RunRow {
    pub scenario: String,
    pub mode: Mode,
    pub rep: usize,
    pub status: String,
    pub expansions: usize,
    pub graph_size: usize,
    pub path_cost: f64,
    pub s: f64,
    pub t: f64,
    pub k_max: f64,
    pub k_mean: f64,
    pub search_ms: f64,
    pub smooth_ms: f64,
}

impl RunRow {
    pub const CSV_HEADER: &'static str =
        "scenario,mode,rep,status,expansions,graph_size,path_cost,S,T,K_max,K_mean,search_ms,smooth_ms";

    /// Columns unaffected by wall-clock noise.
    pub fn stable_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.9},{:.6},{:.6},{:.6},{:.6}",
            self.scenario,
            self.mode.as_str(),
            self.rep,
            self.status,
            self.expansions,
            self.graph_size,
            self.path_cost,
            self.s,
            self.t,
            self.k_max,
            self.k_mean
        )
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{:.3},{:.3}",
            self.stable_csv(),
            self.search_ms,
            self.smooth_ms
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<RunRow>,
}

/// Mean/max/min/std over a sample.
fn stats(values: &[f64]) -> (f64, f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max = values.iter().fold(f64::MIN, |a, &b| a.max(b));
    let min = values.iter().fold(f64::MAX, |a, &b| a.min(b));
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    (mean, max, min, var.sqrt())
}

impl BenchmarkReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(RunRow::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv());
            out.push('\n');
        }
        out
    }

    /// The deterministic column subset (everything except timings).
    pub fn to_stable_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&row.stable_csv());
            out.push('\n');
        }
        out
    }

    /// Aggregates per scenario: smoothing-time statistics per mode and the
    /// corridor-vs-full expansion and graph-size reductions.
    pub fn summary(&self) -> String {
        let mut out = String::from(
            "scenario,mode,smooth_mean_ms,smooth_max_ms,smooth_min_ms,smooth_std_ms,expansions,graph_size,path_cost\n",
        );
        let mut scenarios: Vec<&str> = self.rows.iter().map(|r| r.scenario.as_str()).collect();
        scenarios.dedup();
        let mut reductions = String::new();
        for name in scenarios {
            let mut per_mode = Vec::new();
            for mode in [Mode::Full, Mode::Corridor] {
                let rows: Vec<&RunRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.scenario == name && r.mode == mode && r.status == "ok")
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                let times: Vec<f64> = rows.iter().map(|r| r.smooth_ms).collect();
                let (mean, max, min, std) = stats(&times);
                let _ = writeln!(
                    out,
                    "{name},{},{mean:.3},{max:.3},{min:.3},{std:.3},{},{},{:.9}",
                    mode.as_str(),
                    rows[0].expansions,
                    rows[0].graph_size,
                    rows[0].path_cost
                );
                per_mode.push((mode, rows[0].expansions, rows[0].graph_size));
            }
            if per_mode.len() == 2 {
                let full = per_mode.iter().find(|m| m.0 == Mode::Full).unwrap();
                let corr = per_mode.iter().find(|m| m.0 == Mode::Corridor).unwrap();
                if full.1 > 0 && full.2 > 0 {
                    let _ = writeln!(
                        reductions,
                        "{name},expansion_reduction_pct,{:.2}\n{name},graph_reduction_pct,{:.2}",
                        100.0 * (full.1 as f64 - corr.1 as f64) / full.1 as f64,
                        100.0 * (full.2 as f64 - corr.2 as f64) / full.2 as f64,
                    );
                }
            }
        }
        if !reductions.is_empty() {
            out.push_str("\nscenario,metric,value\n");
            out.push_str(&reductions);
        }
        out
    }
}

/// Run every scenario in its own mode, `repetitions` times: one row per
/// repetition. Failures land in the row's status column and the run
/// continues. To compare corridor against full-space search, list the same
/// scenario twice with the mode flipped (see [`paired_modes`]).
pub fn run_benchmark(scenarios: &[Scenario], repetitions: usize) -> BenchmarkReport {
    let mut report = BenchmarkReport::default();
    for scenario in scenarios {
        for rep in 0..repetitions {
            let row = match plan_end_to_end(scenario) {
                Ok(a) => RunRow {
                    scenario: scenario.name.clone(),
                    mode: scenario.mode,
                    rep,
                    status: "ok".into(),
                    expansions: a.search.expansions,
                    graph_size: a.search.graph_size,
                    path_cost: a.search.cost,
                    s: a.metrics.s,
                    t: a.metrics.t,
                    k_max: a.metrics.k_max,
                    k_mean: a.metrics.k_mean,
                    search_ms: a.timings.planning_ms(),
                    smooth_ms: a.timings.smooth_ms,
                },
                Err(e) => RunRow {
                    scenario: scenario.name.clone(),
                    mode: scenario.mode,
                    rep,
                    status: format!("error: {e}").replace(',', ";"),
                    expansions: 0,
                    graph_size: 0,
                    path_cost: f64::NAN,
                    s: f64::NAN,
                    t: f64::NAN,
                    k_max: f64::NAN,
                    k_mean: f64::NAN,
                    search_ms: 0.0,
                    smooth_ms: 0.0,
                },
            };
            report.rows.push(row);
        }
    }
    report
}

/// Expand each scenario into a corridor/full pair so the report's summary
/// can compute expansion and graph-size reductions.
pub fn paired_modes(scenarios: &[Scenario]) -> Vec<Scenario> {
    let mut out = Vec::with_capacity(scenarios.len() * 2);
    for s in scenarios {
        for mode in [Mode::Corridor, Mode::Full] {
            let mut v = s.clone();
            v.mode = mode;
            out.push(v);
        }
    }
    out
}
