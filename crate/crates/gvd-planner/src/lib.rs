//! Motion planning on grid-based generalized Voronoi diagrams.
//!
//! The pipeline runs in stages: an occupancy grid is converted to a distance
//! map with Voronoi edge flags ([`gvd`]), the shortest Voronoi grid path
//! between start and goal seeds a reduced search region ([`corridor`]), a
//! potential field over that region scores proximity to obstacles
//! ([`field`]), a state-lattice A* over precomputed motion primitives finds a
//! kinematically feasible path ([`lattice`], [`primitives`]), a convex
//! box-constrained QP pulls the path smooth while bounding its deviation
//! ([`smoother`]), and a cubic spline plus forward-backward integration turns
//! it into a time-optimal velocity profile ([`trajectory`]). The [`pipeline`]
//! module wires the stages together and drives the benchmark scenarios.
//!
//! With the `parallel` feature (on by default) the data-parallel inner loops
//! (distance transforms, per-cell field evaluation) fan out over rayon; the
//! sequential fallbacks stay available as `*_seq` entry points and are what
//! you get with `--no-default-features`.

pub mod corridor;
pub mod field;
pub mod grid_map;
pub mod gvd;
pub mod lattice;
pub mod pipeline;
pub mod primitives;
pub mod smoother;
pub mod trajectory;

pub use grid_map::{CellIndex, CellState, GridError, OccupancyGrid, UnknownPolicy};
pub use gvd::{GvdMap, MapDelta};
