//! Criterion benchmarks: the rayon-parallel distance transform and field
//! build against their sequential fallbacks, the QP smoother at benchmark
//! size, and corridor-restricted search against the full-space baseline.
//!
//! Run with `cargo bench -p gvd-planner`. The parallel/sequential pairs need
//! the default `parallel` feature.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use gvd_planner::corridor::{build_corridor, find_voronoi_path, VoronoiCorridor};
use gvd_planner::field::{squared_edt_par, squared_edt_seq, VoronoiField};
use gvd_planner::grid_map::UnknownPolicy;
use gvd_planner::gvd::GvdMap;
use gvd_planner::lattice::{plan, SpeedLimits};
use gvd_planner::pipeline::maze::{corner_rooms, generate_maze};
use gvd_planner::primitives::{generate_primitives, Pose, PrimitiveConfig};
use gvd_planner::smoother::{smooth, ReferencePath, SmootherConfig};

const R_C: f64 = 0.566;

fn bench_edt(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [600usize, 1200] {
        let mut seeds = vec![false; n * n];
        for _ in 0..2 * n {
            seeds[rng.gen_range(0..n * n)] = true;
        }
        let mut group = c.benchmark_group(format!("squared_edt_{n}x{n}"));
        group.bench_function("parallel", |b| b.iter(|| squared_edt_par(&seeds, n, n)));
        group.bench_function("sequential", |b| b.iter(|| squared_edt_seq(&seeds, n, n)));
        group.finish();
    }
}

fn maze_stage(cells: usize, corridor_width: usize) -> (GvdMap, VoronoiCorridor) {
    let grid = generate_maze(cells, cells, corridor_width, 0.1, 0).unwrap();
    let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
    let (a, b) = corner_rooms(cells, cells, corridor_width);
    let vp = find_voronoi_path(&gvd, a, b, R_C).unwrap();
    let corridor = build_corridor(&gvd, &vp);
    (gvd, corridor)
}

fn bench_field_build(c: &mut Criterion) {
    // Above the dispatch threshold, so `build` takes the rayon transform
    // while `build_seq` is the plain fallback.
    let (gvd, corridor) = maze_stage(600, 18);
    let mut group = c.benchmark_group("field_build_maze600");
    group.bench_function("parallel", |b| {
        b.iter(|| VoronoiField::build(&gvd, &corridor, 2.0 * R_C).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| VoronoiField::build_seq(&gvd, &corridor, 2.0 * R_C).unwrap())
    });
    group.finish();
}

fn bench_smoother(c: &mut Criterion) {
    let n = 401;
    let vertices: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let x = 0.1 * i as f64;
            [x, 0.5 * (x / 3.0).sin()]
        })
        .collect();
    let reference = ReferencePath {
        vertices,
        clearances: vec![1.5; n],
        margins: vec![(std::f64::consts::SQRT_2 / 2.0 * 1.5 - R_C).max(0.0); n],
        r_c: R_C,
        spacing: 0.1,
    };
    let cfg = SmootherConfig::default();
    c.bench_function("smooth_401_vertices", |b| {
        b.iter_batched(
            || reference.clone(),
            |r| smooth(&r, &cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_search_modes(c: &mut Criterion) {
    let grid = generate_maze(200, 200, 18, 0.1, 0).unwrap();
    let gvd = GvdMap::build(&grid, UnknownPolicy::Obstacle);
    let (a, b) = corner_rooms(200, 200, 18);
    let (ax, ay) = gvd.cell_to_world(a);
    let (bx, by) = gvd.cell_to_world(b);
    let start = Pose::new(ax, ay, 0.0);
    let goal = Pose::new(bx, by, 0.0);
    let prims =
        generate_primitives(0.1, R_C / std::f64::consts::SQRT_2, &PrimitiveConfig::default())
            .unwrap();
    let limits = SpeedLimits {
        v_max: 1.5,
        omega_max: 2.0,
    };
    let vp = find_voronoi_path(&gvd, a, b, R_C).unwrap();
    let corridor = build_corridor(&gvd, &vp);
    let field = VoronoiField::build(&gvd, &corridor, 2.0 * R_C).unwrap();
    let full = VoronoiCorridor::full_free_space(&gvd);
    let field_full = VoronoiField::build(&gvd, &full, 2.0 * R_C).unwrap();

    let mut group = c.benchmark_group("lattice_search_maze200");
    group.sample_size(10);
    group.bench_function("corridor", |b| {
        b.iter(|| plan(&start, &goal, &gvd, &corridor, &field, &prims, &limits).unwrap())
    });
    group.bench_function("full_space", |b| {
        b.iter(|| plan(&start, &goal, &gvd, &full, &field_full, &prims, &limits).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_edt,
    bench_field_build,
    bench_smoother,
    bench_search_modes
);
criterion_main!(benches);
