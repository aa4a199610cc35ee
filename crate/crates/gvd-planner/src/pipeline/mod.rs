//! End-to-end planner: map → distance map → corridor → potential field →
//! lattice search → QP smoothing → spline and velocity profile, plus the
//! scenario runner behind the benchmark CLI.
//!
//! Corridor mode routes the search through the Voronoi corridor; full mode
//! searches every free cell with the same cost function, which is the
//! baseline the benchmarks compare against. Distance-map construction is
//! timed separately and excluded from the reported search time (it belongs
//! to the mapper, not the planner); the search time covers the Voronoi path
//! and corridor construction, the field, the heuristic, and the A* itself.

pub mod bench;
pub mod maze;
pub mod scenario;
pub mod svg;

use std::time::Instant;

use thiserror::Error;

use crate::corridor::{build_corridor, find_voronoi_path, CorridorError, VoronoiCorridor};
use crate::field::{FieldError, VoronoiField};
use crate::grid_map::{CellIndex, GridError, OccupancyGrid, UnknownPolicy};
use crate::gvd::{GvdError, GvdMap};
use crate::lattice::{plan, LatticeError, SearchResult, SpeedLimits};
use crate::primitives::{
    generate_primitives, Pose, PrimitiveConfig, PrimitiveError, PrimitiveSet,
};
use crate::smoother::{
    build_reference, smooth, ReferencePath, SmoothedPath, SmootherConfig, SmootherError,
    SAMPLE_SPACING,
};
use crate::trajectory::{
    compute_metrics, fit_spline, plan_velocity, MotionLimits, PathMetrics, PathSpline,
    TrajectoryError, VelocityProfile,
};
pub use scenario::{Mode, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Gvd(#[from] GvdError),
    #[error(transparent)]
    Corridor(#[from] CorridorError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Primitives(#[from] PrimitiveError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Smoother(#[from] SmootherError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Contract(String),
}

#[derive(Debug, Error)]
#[error("{stage} stage: {source}")]
pub struct PipelineError {
    pub stage: &'static str,
    #[source]
    pub source: StageError,
}

impl PipelineError {
    fn at<E: Into<StageError>>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
        move |source| PipelineError {
            stage,
            source: source.into(),
        }
    }

    /// Input problems (unreadable or malformed files) versus planning
    /// failures; the CLI maps these to different exit codes.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.source,
            StageError::Grid(_) | StageError::Scenario(_) | StageError::Primitives(_)
        )
    }
}

/// Per-stage wall-clock times, milliseconds.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub gvd_ms: f64,
    /// Voronoi path + corridor + field construction.
    pub corridor_ms: f64,
    /// Lattice A* including the corridor-restricted heuristic.
    pub search_ms: f64,
    pub smooth_ms: f64,
    pub velocity_ms: f64,
}

impl StageTimings {
    /// Reported planning time: everything downstream of the mapper-owned
    /// distance map, up to and including the search.
    pub fn planning_ms(&self) -> f64 {
        self.corridor_ms + self.search_ms
    }
}

#[derive(Debug)]
pub struct PipelineArtifacts {
    pub gvd: GvdMap,
    pub corridor: VoronoiCorridor,
    pub field: VoronoiField,
    pub primitives: PrimitiveSet,
    pub search: SearchResult,
    pub reference: ReferencePath,
    pub smoothed: SmoothedPath,
    pub spline: PathSpline,
    pub profile: VelocityProfile,
    pub metrics: PathMetrics,
    pub timings: StageTimings,
}

/// Everything `run_pipeline` needs besides the map itself.
#[derive(Debug, Clone)]
pub struct PipelineParams {
    pub start: Pose,
    pub goal: Pose,
    pub limits: MotionLimits,
    pub r_c: f64,
    pub d_o_min: f64,
    pub smoother: SmootherConfig,
    pub mode: Mode,
    pub local_length: Option<f64>,
    /// Force the potential to zero in the search and smoother reference
    /// (the unweighted baseline of the safety comparison).
    pub zero_potential: bool,
}

impl PipelineParams {
    pub fn from_scenario(s: &Scenario) -> Self {
        PipelineParams {
            start: s.start,
            goal: s.goal,
            limits: MotionLimits {
                v_max: s.v_max,
                omega_max: s.omega_max,
                a_max: s.a_max,
            },
            r_c: s.r_c,
            d_o_min: s.d_o_min,
            smoother: SmootherConfig {
                w_s: s.w_s,
                w_r: s.w_r,
                ..Default::default()
            },
            mode: s.mode,
            local_length: s.local_length,
            zero_potential: false,
        }
    }
}

/// Snap a world point to the nearest traversable cell with clearance at
/// least `r_c`, searching a `2 r_c` window.
fn snap_clear_cell(gvd: &GvdMap, x: f64, y: f64, r_c: f64) -> Option<CellIndex> {
    let res = gvd.resolution();
    let span = (2.0 * r_c / res).ceil() as i32;
    let fx = ((x - gvd.origin().0) / res - 0.5).round() as i32;
    let fy = ((y - gvd.origin().1) / res - 0.5).round() as i32;
    let mut best: Option<(f64, CellIndex)> = None;
    for iy in fy - span..=fy + span {
        for ix in fx - span..=fx + span {
            let c = CellIndex::new(ix, iy);
            if !gvd.in_bounds(c) || gvd.is_obstacle(c) || !gvd.meets_clearance(c, r_c) {
                continue;
            }
            let (wx, wy) = gvd.cell_to_world(c);
            let d = (wx - x).hypot(wy - y);
            if d > 2.0 * r_c {
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
    best.map(|(_, c)| c)
}

/// Run every stage on an in-memory grid.
pub fn run_pipeline(
    grid: &OccupancyGrid,
    params: &PipelineParams,
) -> Result<PipelineArtifacts, PipelineError> {
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let gvd = GvdMap::build(grid, UnknownPolicy::Obstacle);
    timings.gvd_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let corridor = match params.mode {
        Mode::Full => VoronoiCorridor::full_free_space(&gvd),
        Mode::Corridor => {
            let start_cell = snap_clear_cell(&gvd, params.start.x, params.start.y, params.r_c)
                .ok_or_else(|| PipelineError {
                    stage: "corridor",
                    source: CorridorError::BlockedCell(
                        gvd.world_to_cell(params.start.x, params.start.y)
                            .unwrap_or(CellIndex::new(-1, -1)),
                    )
                    .into(),
                })?;
            let goal_cell = snap_clear_cell(&gvd, params.goal.x, params.goal.y, params.r_c)
                .ok_or_else(|| PipelineError {
                    stage: "corridor",
                    source: CorridorError::BlockedCell(
                        gvd.world_to_cell(params.goal.x, params.goal.y)
                            .unwrap_or(CellIndex::new(-1, -1)),
                    )
                    .into(),
                })?;
            match find_voronoi_path(&gvd, start_cell, goal_cell, params.r_c) {
                Ok(vp) => build_corridor(&gvd, &vp),
                // Degenerate maps (no obstacles, a single basin) have no
                // Voronoi edges at all; search the full free space instead.
                Err(CorridorError::IsolatedCell(_)) => VoronoiCorridor::full_free_space(&gvd),
                Err(e) => {
                    return Err(PipelineError {
                        stage: "corridor",
                        source: e.into(),
                    })
                }
            }
        }
    };
    let d_o_min = if params.zero_potential {
        // A vanishing safety threshold zeroes the potential everywhere
        // except inside obstacles, which stay infeasible anyway.
        f64::MIN_POSITIVE
    } else {
        params.d_o_min
    };
    let field = VoronoiField::build(&gvd, &corridor, d_o_min).map_err(PipelineError::at("field"))?;
    timings.corridor_ms = t.elapsed().as_secs_f64() * 1e3;

    let primitives = generate_primitives(
        grid.resolution(),
        params.r_c / std::f64::consts::SQRT_2,
        &PrimitiveConfig::default(),
    )
    .map_err(PipelineError::at("primitives"))?;

    let t = Instant::now();
    let speed = SpeedLimits {
        v_max: params.limits.v_max,
        omega_max: params.limits.omega_max,
    };
    let search = plan(
        &params.start,
        &params.goal,
        &gvd,
        &corridor,
        &field,
        &primitives,
        &speed,
    )
    .map_err(PipelineError::at("search"))?;
    timings.search_ms = t.elapsed().as_secs_f64() * 1e3;

    let search_poses: Vec<Pose> = match params.local_length {
        None => search.path.clone(),
        Some(limit) => truncate_path(&search.path, limit),
    };

    let t = Instant::now();
    let reference =
        build_reference(&search_poses, &gvd, params.r_c).map_err(PipelineError::at("smooth"))?;
    let smoothed = smooth(&reference, &params.smoother).map_err(PipelineError::at("smooth"))?;
    timings.smooth_ms = t.elapsed().as_secs_f64() * 1e3;

    // Defense in depth: the box constraints guarantee clearance, but the
    // safety claim is re-checked against the distance map before anything
    // downstream consumes the path.
    for (i, v) in smoothed.vertices.iter().enumerate() {
        let cell = gvd.world_to_cell(v[0], v[1]).ok_or_else(|| PipelineError {
            stage: "verify",
            source: StageError::Contract(format!("smoothed vertex {i} left the map")),
        })?;
        if gvd.clearance_at(cell) < params.r_c {
            return Err(PipelineError {
                stage: "verify",
                source: StageError::Contract(format!(
                    "smoothed vertex {i} at ({:.3}, {:.3}) clears {:.3} m < r_c {:.3} m",
                    v[0],
                    v[1],
                    gvd.clearance_at(cell),
                    params.r_c
                )),
            });
        }
    }

    let t = Instant::now();
    let spline = fit_spline(&smoothed.vertices).map_err(PipelineError::at("velocity"))?;
    let profile = plan_velocity(&spline, &params.limits, 0.0, 0.0, SAMPLE_SPACING)
        .map_err(PipelineError::at("velocity"))?;
    let metrics = compute_metrics(&spline, &profile).map_err(PipelineError::at("velocity"))?;
    timings.velocity_ms = t.elapsed().as_secs_f64() * 1e3;

    Ok(PipelineArtifacts {
        gvd,
        corridor,
        field,
        primitives,
        search,
        reference,
        smoothed,
        spline,
        profile,
        metrics,
        timings,
    })
}

/// Load the scenario's map and run the pipeline.
pub fn plan_end_to_end(scenario: &Scenario) -> Result<PipelineArtifacts, PipelineError> {
    let grid = OccupancyGrid::load(&scenario.map).map_err(PipelineError::at("load"))?;
    let mut params = PipelineParams::from_scenario(scenario);
    params.mode = scenario.mode;
    run_pipeline(&grid, &params)
}

/// Keep the leading poses up to `limit` meters of arc length (at least two
/// poses survive).
fn truncate_path(path: &[Pose], limit: f64) -> Vec<Pose> {
    let mut out = vec![path[0]];
    let mut acc = 0.0;
    for w in path.windows(2) {
        let d = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
        if acc + d > limit && out.len() >= 2 {
            break;
        }
        acc += d;
        out.push(w[1]);
    }
    if out.len() < 2 && path.len() >= 2 {
        out.push(path[1]);
    }
    out
}
