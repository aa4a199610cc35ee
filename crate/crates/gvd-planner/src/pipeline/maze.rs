//! Seeded maze generator for the benchmark scenarios.
//!
//! A perfect maze is carved on a coarse macro grid with randomized
//! depth-first search, then 10% of the surviving interior walls come down to
//! create loops (so corridor- and full-space search face genuine route
//! choices). Corridors are `corridor_width` cells wide; walls are half that,
//! thick enough that the distance map keeps the robot off them.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid_map::{CellIndex, CellState, OccupancyGrid};

#[derive(Debug, Error)]
pub enum MazeError {
    #[error("maze needs at least 20x20 cells, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("corridor width {0} is too narrow (minimum 3 cells)")]
    TooNarrow(usize),
}

pub fn generate_maze(
    width: usize,
    height: usize,
    corridor_width: usize,
    resolution: f64,
    seed: u64,
) -> Result<OccupancyGrid, MazeError> {
    if width < 20 || height < 20 {
        return Err(MazeError::TooSmall(width, height));
    }
    if corridor_width < 3 {
        return Err(MazeError::TooNarrow(corridor_width));
    }
    let wall = (corridor_width / 2 + 1).max(2);
    let pitch = corridor_width + wall;
    let mx = ((width - wall) / pitch).max(1);
    let my = ((height - wall) / pitch).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Depth-first carve over macro cells.
    let mut visited = vec![false; mx * my];
    let mut open_east = vec![false; mx * my]; // passage to (x+1, y)
    let mut open_north = vec![false; mx * my]; // passage to (x, y+1)
    let mut stack = vec![(0usize, 0usize)];
    visited[0] = true;
    while let Some(&(x, y)) = stack.last() {
        let mut neighbors = Vec::with_capacity(4);
        if x + 1 < mx && !visited[y * mx + x + 1] {
            neighbors.push(0u8);
        }
        if x > 0 && !visited[y * mx + x - 1] {
            neighbors.push(1);
        }
        if y + 1 < my && !visited[(y + 1) * mx + x] {
            neighbors.push(2);
        }
        if y > 0 && !visited[(y - 1) * mx + x] {
            neighbors.push(3);
        }
        if neighbors.is_empty() {
            stack.pop();
            continue;
        }
        let dir = neighbors[rng.gen_range(0..neighbors.len())];
        let (nx, ny) = match dir {
            0 => {
                open_east[y * mx + x] = true;
                (x + 1, y)
            }
            1 => {
                open_east[y * mx + x - 1] = true;
                (x - 1, y)
            }
            2 => {
                open_north[y * mx + x] = true;
                (x, y + 1)
            }
            _ => {
                open_north[(y - 1) * mx + x] = true;
                (x, y - 1)
            }
        };
        visited[ny * mx + nx] = true;
        stack.push((nx, ny));
    }

    // Knock down 10% of the remaining interior walls to create loops.
    let mut closed: Vec<(usize, bool)> = Vec::new();
    for y in 0..my {
        for x in 0..mx {
            if x + 1 < mx && !open_east[y * mx + x] {
                closed.push((y * mx + x, true));
            }
            if y + 1 < my && !open_north[y * mx + x] {
                closed.push((y * mx + x, false));
            }
        }
    }
    let removals = closed.len() / 10;
    for _ in 0..removals {
        let pick = rng.gen_range(0..closed.len());
        let (idx, east) = closed.swap_remove(pick);
        if east {
            open_east[idx] = true;
        } else {
            open_north[idx] = true;
        }
    }

    // Rasterize. Everything starts occupied; carve rooms and passages.
    let mut grid = OccupancyGrid::filled(width, height, resolution, (0.0, 0.0), CellState::Occupied);
    let mut carve = |x0: usize, y0: usize, w: usize, h: usize| {
        for iy in y0..(y0 + h).min(height) {
            for ix in x0..(x0 + w).min(width) {
                grid.set_state(CellIndex::new(ix as i32, iy as i32), CellState::Free);
            }
        }
    };
    for y in 0..my {
        for x in 0..mx {
            let cx = wall + x * pitch;
            let cy = wall + y * pitch;
            carve(cx, cy, corridor_width, corridor_width);
            if open_east[y * mx + x] {
                carve(cx + corridor_width, cy, wall, corridor_width);
            }
            if open_north[y * mx + x] {
                carve(cx, cy + corridor_width, corridor_width, wall);
            }
        }
    }
    Ok(grid)
}

/// Deterministic pick of well-cleared start/goal cells near opposite maze
/// corners (first macro room and last macro room centers).
pub fn corner_rooms(
    width: usize,
    height: usize,
    corridor_width: usize,
) -> (CellIndex, CellIndex) {
    let wall = (corridor_width / 2 + 1).max(2);
    let pitch = corridor_width + wall;
    let mx = ((width - wall) / pitch).max(1);
    let my = ((height - wall) / pitch).max(1);
    let center = |m: usize| (wall + m * pitch + corridor_width / 2) as i32;
    (
        CellIndex::new(center(0), center(0)),
        CellIndex::new(center(mx - 1), center(my - 1)),
    )
}
