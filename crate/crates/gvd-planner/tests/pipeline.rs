//! End-to-end pipeline tests over real map files and scenario files.

use gvd_planner::grid_map::{CellIndex, CellState, OccupancyGrid, UnknownPolicy};
use gvd_planner::gvd::GvdMap;
use gvd_planner::pipeline::bench::run_benchmark;
use gvd_planner::pipeline::maze::{corner_rooms, generate_maze};
use gvd_planner::pipeline::svg::{render_svg, SvgLayers};
use gvd_planner::pipeline::{
    plan_end_to_end, run_pipeline, Mode, PipelineParams, Scenario,
};
use gvd_planner::primitives::Pose;
use gvd_planner::smoother::SmootherConfig;
use gvd_planner::trajectory::MotionLimits;

fn default_params(start: Pose, goal: Pose, r_c: f64) -> PipelineParams {
    PipelineParams {
        start,
        goal,
        limits: MotionLimits {
            v_max: 1.5,
            omega_max: 1.0,
            a_max: 1.0,
        },
        r_c,
        d_o_min: 2.0 * r_c,
        smoother: SmootherConfig::default(),
        mode: Mode::Corridor,
        local_length: None,
        zero_potential: false,
    }
}

/// Minimal XML well-formedness scan: tag balance and quote closure.
fn assert_well_formed_xml(doc: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = doc;
    while let Some(open) = rest.find('<') {
        rest = &rest[open + 1..];
        let close = rest.find('>').expect("unclosed tag");
        let tag = &rest[..close];
        rest = &rest[close + 1..];
        assert!(!tag.is_empty(), "empty tag");
        assert_eq!(
            tag.matches('"').count() % 2,
            0,
            "odd quote count in <{tag}>"
        );
        if let Some(name) = tag.strip_prefix('/') {
            let top = stack.pop().unwrap_or_else(|| panic!("stray </{name}>"));
            assert_eq!(top, name, "mismatched closing tag");
        } else if tag.starts_with('?') || tag.starts_with('!') || tag.ends_with('/') {
            // declaration, comment, or self-closing: no stack change
        } else {
            let name = tag.split_whitespace().next().unwrap();
            stack.push(name.to_string());
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}

#[test]
fn scenario_file_plans_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let grid = generate_maze(100, 100, 10, 0.1, 5).unwrap();
    let map = dir.path().join("m.pgm");
    grid.save(&map).unwrap();
    let (a, b) = corner_rooms(100, 100, 10);
    let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
    let (ax, ay) = gvd.cell_to_world(a);
    let (bx, by) = gvd.cell_to_world(b);
    let scn = format!(
        "map: m.pgm\nstart_x: {ax}\nstart_y: {ay}\ngoal_x: {bx}\ngoal_y: {by}\nr_c: 0.35\nmode: corridor\n"
    );
    let scn_path = dir.path().join("t.scn");
    std::fs::write(&scn_path, scn).unwrap();
    let scenario = Scenario::from_file(&scn_path).unwrap();
    let artifacts = plan_end_to_end(&scenario).unwrap();
    assert!(artifacts.search.cost > 0.0);
    assert!(artifacts.metrics.s > 1.0);
    // Profile CSV and metrics CSV have their schema headers.
    let profile_csv = artifacts.profile.to_csv().unwrap();
    assert!(profile_csv.starts_with("s,v,t_cumulative\n"));
    assert!(artifacts.search.metrics_csv().starts_with("expansions,time_ms,graph_size,path_cost\n"));
    let field_csv = artifacts.field.dump_csv(&artifacts.gvd, &artifacts.corridor);
    assert!(field_csv.starts_with("ix,iy,d_o,d_v,rho\n"));

    // Full SVG output parses as balanced XML.
    let svg = render_svg(&SvgLayers {
        grid: &grid,
        gvd: Some(&artifacts.gvd),
        corridor: Some(&artifacts.corridor),
        searched: Some(&artifacts.search.path),
        smoothed: Some(&artifacts.smoothed.vertices),
        footprint_half_width: Some(0.35 / std::f64::consts::SQRT_2),
    });
    assert_well_formed_xml(&svg);
}

#[test]
fn maze_fixture_occupied_count_matches_raw_pixels() {
    // Independent pixel counter: read the raster bytes straight off the
    // file, skipping the three header lines, without the map loader.
    let dir = tempfile::tempdir().unwrap();
    let grid = generate_maze(200, 200, 14, 0.1, 7).unwrap();
    let map = dir.path().join("maze.pgm");
    grid.save(&map).unwrap();
    let bytes = std::fs::read(&map).unwrap();
    let mut newlines = 0;
    let mut raster_start = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'\n' {
            newlines += 1;
            if newlines == 3 {
                raster_start = i + 1;
                break;
            }
        }
    }
    let raster = &bytes[raster_start..];
    assert_eq!(raster.len(), 200 * 200);
    // Occupied pixels are written as gray 0; threshold at half of maxval.
    let dark_pixels = raster.iter().filter(|&&v| v as f64 <= 0.5 * 255.0).count();

    let loaded = OccupancyGrid::load(&map).unwrap();
    assert_eq!(loaded.count(CellState::Occupied), dark_pixels);
    assert_eq!(loaded.count(CellState::Occupied), grid.count(CellState::Occupied));
    let frac = grid.count(CellState::Free) as f64 / (200.0 * 200.0);
    assert!((0.3..=0.7).contains(&frac));
}

#[test]
fn corridor_and_full_agree_on_maze_cost() {
    let grid = generate_maze(100, 100, 12, 0.1, 11).unwrap();
    let (a, b) = corner_rooms(100, 100, 12);
    let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
    let (ax, ay) = gvd.cell_to_world(a);
    let (bx, by) = gvd.cell_to_world(b);
    let mut p = default_params(Pose::new(ax, ay, 0.0), Pose::new(bx, by, 0.0), 0.45);
    let corridor_run = run_pipeline(&grid, &p).unwrap();
    p.mode = Mode::Full;
    let full_run = run_pipeline(&grid, &p).unwrap();
    assert!(
        (corridor_run.search.cost - full_run.search.cost).abs() <= 1e-9,
        "cost differs: {} vs {}",
        corridor_run.search.cost,
        full_run.search.cost
    );
    assert!(corridor_run.search.expansions < full_run.search.expansions);
    assert!(corridor_run.search.graph_size < full_run.search.graph_size);
    // Stage contracts re-checked at pipeline level.
    for v in &corridor_run.smoothed.vertices {
        let cell = corridor_run.gvd.world_to_cell(v[0], v[1]).unwrap();
        assert!(corridor_run.gvd.clearance_at(cell) >= 0.45);
    }
}

#[test]
fn walled_off_goal_reports_planning_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut grid = OccupancyGrid::filled(40, 40, 0.1, (0.0, 0.0), CellState::Free);
    for iy in 0..40 {
        grid.set_state(CellIndex::new(20, iy), CellState::Occupied);
    }
    let map = dir.path().join("w.pgm");
    grid.save(&map).unwrap();
    let scn_path = dir.path().join("w.scn");
    std::fs::write(
        &scn_path,
        "map: w.pgm\nstart_x: 0.55\nstart_y: 2.05\ngoal_x: 3.45\ngoal_y: 2.05\nr_c: 0.2\n",
    )
    .unwrap();
    let scenario = Scenario::from_file(&scn_path).unwrap();
    let err = plan_end_to_end(&scenario).unwrap_err();
    assert!(!err.is_input_error(), "expected planning failure: {err}");
}

#[test]
fn missing_map_reports_input_failure() {
    let dir = tempfile::tempdir().unwrap();
    let scn_path = dir.path().join("x.scn");
    std::fs::write(
        &scn_path,
        "map: nope.pgm\nstart_x: 1\nstart_y: 1\ngoal_x: 2\ngoal_y: 2\n",
    )
    .unwrap();
    let scenario = Scenario::from_file(&scn_path).unwrap();
    let err = plan_end_to_end(&scenario).unwrap_err();
    assert!(err.is_input_error());
}

#[test]
fn bench_records_partial_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let grid = generate_maze(60, 60, 8, 0.1, 2).unwrap();
    let map = dir.path().join("m.pgm");
    grid.save(&map).unwrap();
    let (a, b) = corner_rooms(60, 60, 8);
    let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
    let (ax, ay) = gvd.cell_to_world(a);
    let (bx, by) = gvd.cell_to_world(b);
    let good = Scenario {
        name: "good".into(),
        ..Scenario::new(map.clone(), Pose::new(ax, ay, 0.0), Pose::new(bx, by, 0.0))
    };
    let mut good = good;
    good.r_c = 0.3;
    good.d_o_min = 0.6;
    let mut bad = good.clone();
    bad.name = "bad".into();
    bad.map = dir.path().join("missing.pgm");
    let report = run_benchmark(&gvd_planner::pipeline::bench::paired_modes(&[good, bad]), 2);
    assert_eq!(report.rows.len(), 8); // 2 scenarios x 2 modes x 2 reps
    let ok_rows = report.rows.iter().filter(|r| r.status == "ok").count();
    let err_rows = report.rows.iter().filter(|r| r.status != "ok").count();
    assert_eq!(ok_rows, 4);
    assert_eq!(err_rows, 4);
    // 1 scenario x 3 reps keeps row counts aligned with run counts.
    let csv = report.to_csv();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.lines().next().unwrap().contains("expansions"));
}

#[test]
fn corridor_mask_exports_as_pbm() {
    let grid = generate_maze(60, 60, 8, 0.1, 4).unwrap();
    let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
    let (a, b) = corner_rooms(60, 60, 8);
    let path = gvd_planner::corridor::find_voronoi_path(&gvd, a, b, 0.3).unwrap();
    let corridor = gvd_planner::corridor::build_corridor(&gvd, &path);
    let pbm = corridor.to_pbm();
    let body = pbm.strip_prefix("P1\n60 60\n").expect("pbm header");
    let ones = body.chars().filter(|&c| c == '1').count();
    assert_eq!(ones, corridor.member_count());
}
