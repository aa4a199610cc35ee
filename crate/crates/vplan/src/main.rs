//! Benchmark CLI around the planning pipeline.
//!
//! Exit codes: 0 on success, 2 when planning fails (no route, blocked
//! endpoints, infeasible profile), 3 on input errors (bad files, bad flags).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gvd_planner::grid_map::OccupancyGrid;
use gvd_planner::gvd::GvdMap;
use gvd_planner::pipeline::bench::{paired_modes, run_benchmark};
use gvd_planner::pipeline::maze::generate_maze;
use gvd_planner::pipeline::svg::{render_svg, SvgLayers};
use gvd_planner::pipeline::{plan_end_to_end, Mode, Scenario};
use gvd_planner::primitives::{generate_primitives, save_primitives, PrimitiveConfig};
use gvd_planner::trajectory::PathMetrics;
use gvd_planner::UnknownPolicy;

#[derive(Parser)]
#[command(name = "vplan", version, about = "Voronoi-corridor motion planning and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scenario and write SVG and CSV artifacts.
    Plan(PlanArgs),
    /// Run paired corridor/full benchmarks over scenario files.
    Bench(BenchArgs),
    /// Generate a maze map (PGM + sidecar).
    GenMaze(GenMazeArgs),
    /// Generate a motion-primitive file.
    GenPrims(GenPrimsArgs),
    /// Dump a map's distance transform and Voronoi flags as CSV.
    DumpGvd(DumpGvdArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario file (key: value lines).
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario's search mode.
    #[arg(long)]
    mode: Option<String>,
    /// Truncate the searched path before smoothing, meters.
    #[arg(long)]
    local_length: Option<f64>,
    /// Output directory for the artifacts.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Scenario files; each runs in both corridor and full mode.
    #[arg(long = "scenario", required = true)]
    scenarios: Vec<PathBuf>,
    /// Repetitions per scenario and mode.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Override every scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GenMazeArgs {
    #[arg(long, default_value_t = 200)]
    width: usize,
    #[arg(long, default_value_t = 200)]
    height: usize,
    /// Corridor width in cells.
    #[arg(long, default_value_t = 14)]
    corridor_width: usize,
    /// Meters per cell.
    #[arg(long, default_value_t = 0.1)]
    resolution: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output PGM path (the sidecar lands next to it).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenPrimsArgs {
    #[arg(long, default_value_t = 0.1)]
    resolution: f64,
    /// Footprint half width, meters (square robot).
    #[arg(long, default_value_t = 0.4)]
    footprint: f64,
    /// Reject turns above this curvature, 1/m.
    #[arg(long)]
    max_curvature: Option<f64>,
    /// Include reverse straight moves.
    #[arg(long)]
    allow_backward: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DumpGvdArgs {
    /// Map PGM path.
    #[arg(long)]
    map: PathBuf,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    /// Bad inputs: unreadable or malformed files, bad flags.
    Input(String),
    /// The planner itself could not produce a result.
    Planning(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Planning(_) => 2,
            CliError::Input(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Planning(m) | CliError::Input(m) => m,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn run_plan(args: &PlanArgs) -> Result<(), CliError> {
    let mut scenario = Scenario::from_file(&args.scenario)
        .map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(mode) = &args.mode {
        scenario.mode = mode
            .parse::<Mode>()
            .map_err(CliError::Input)?;
    }
    if args.local_length.is_some() {
        scenario.local_length = args.local_length;
    }
    let artifacts = plan_end_to_end(&scenario).map_err(|e| {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Planning(e.to_string())
        }
    })?;
    let grid = OccupancyGrid::load(&scenario.map).map_err(|e| CliError::Input(e.to_string()))?;

    let base = args.out_dir.join(&scenario.name);
    let svg = render_svg(&SvgLayers {
        grid: &grid,
        gvd: Some(&artifacts.gvd),
        corridor: Some(&artifacts.corridor),
        searched: Some(&artifacts.search.path),
        smoothed: Some(&artifacts.smoothed.vertices),
        footprint_half_width: Some(scenario.r_c / std::f64::consts::SQRT_2),
    });
    write_file(&base.with_extension("svg"), &svg)?;
    write_file(
        &base.with_extension("search.csv"),
        &artifacts.search.metrics_csv(),
    )?;
    write_file(
        &base.with_extension("search_path.txt"),
        &artifacts.search.path_text(),
    )?;
    write_file(
        &base.with_extension("smoothed.txt"),
        &artifacts.smoothed.to_text(),
    )?;
    let profile_csv = artifacts
        .profile
        .to_csv()
        .map_err(|e| CliError::Planning(e.to_string()))?;
    write_file(&base.with_extension("profile.csv"), &profile_csv)?;
    write_file(
        &base.with_extension("metrics.csv"),
        &format!(
            "{}\n{}\n",
            PathMetrics::csv_header(),
            artifacts.metrics.to_csv_row()
        ),
    )?;
    write_file(
        &base.with_extension("field.csv"),
        &artifacts.field.dump_csv(&artifacts.gvd, &artifacts.corridor),
    )?;
    println!(
        "planned {}: cost {:.3} s, {} expansions, S {:.2} m, T {:.2} s -> {}",
        scenario.name,
        artifacts.search.cost,
        artifacts.search.expansions,
        artifacts.metrics.s,
        artifacts.metrics.t,
        args.out_dir.display()
    );
    Ok(())
}

fn run_bench(args: &BenchArgs) -> Result<(), CliError> {
    let mut scenarios = Vec::new();
    for path in &args.scenarios {
        let mut s = Scenario::from_file(path).map_err(|e| CliError::Input(e.to_string()))?;
        if let Some(seed) = args.seed {
            s.seed = seed;
        }
        scenarios.push(s);
    }
    let report = run_benchmark(&paired_modes(&scenarios), args.reps);
    write_file(&args.out_dir.join("bench.csv"), &report.to_csv())?;
    write_file(&args.out_dir.join("bench_summary.csv"), &report.summary())?;
    let failures = report.rows.iter().filter(|r| r.status != "ok").count();
    println!(
        "{} rows ({} failures) -> {}",
        report.rows.len(),
        failures,
        args.out_dir.display()
    );
    if failures == report.rows.len() && !report.rows.is_empty() {
        return Err(CliError::Planning("every benchmark run failed".into()));
    }
    Ok(())
}

fn run_gen_maze(args: &GenMazeArgs) -> Result<(), CliError> {
    let grid = generate_maze(
        args.width,
        args.height,
        args.corridor_width,
        args.resolution,
        args.seed,
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    grid.save(&args.out).map_err(|e| CliError::Input(e.to_string()))?;
    println!(
        "maze {}x{} seed {} -> {}",
        args.width,
        args.height,
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn run_gen_prims(args: &GenPrimsArgs) -> Result<(), CliError> {
    let config = PrimitiveConfig {
        max_curvature: args.max_curvature,
        allow_backward: args.allow_backward,
    };
    let set = generate_primitives(args.resolution, args.footprint, &config)
        .map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    save_primitives(&set, &args.out).map_err(|e| CliError::Input(e.to_string()))?;
    println!("{} primitives -> {}", set.primitives.len(), args.out.display());
    Ok(())
}

fn run_dump_gvd(args: &DumpGvdArgs) -> Result<(), CliError> {
    let grid = OccupancyGrid::load(&args.map).map_err(|e| CliError::Input(e.to_string()))?;
    let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
    let csv = gvd.dump_csv();
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Plan(args) => run_plan(args),
        Command::Bench(args) => run_bench(args),
        Command::GenMaze(args) => run_gen_maze(args),
        Command::GenPrims(args) => run_gen_prims(args),
        Command::DumpGvd(args) => run_dump_gvd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
