//! SVG rendering of planning artifacts: occupancy, Voronoi edges, corridor
//! mask, searched path (green), smoothed path (red), and robot footprint
//! strips, layered in that order.

use std::fmt::Write as _;

use crate::corridor::VoronoiCorridor;
use crate::grid_map::{CellIndex, CellState, OccupancyGrid};
use crate::gvd::GvdMap;
use crate::primitives::Pose;

const PX_PER_METER: f64 = 50.0;

pub struct SvgLayers<'a> {
    pub grid: &'a OccupancyGrid,
    pub gvd: Option<&'a GvdMap>,
    pub corridor: Option<&'a VoronoiCorridor>,
    pub searched: Option<&'a [Pose]>,
    pub smoothed: Option<&'a [[f64; 2]]>,
    /// Draw footprint squares along the smoothed path at this half width.
    pub footprint_half_width: Option<f64>,
}

impl<'a> SvgLayers<'a> {
    pub fn map_only(grid: &'a OccupancyGrid) -> Self {
        SvgLayers {
            grid,
            gvd: None,
            corridor: None,
            searched: None,
            smoothed: None,
            footprint_half_width: None,
        }
    }
}

pub fn render_svg(layers: &SvgLayers) -> String {
    let grid = layers.grid;
    let res = grid.resolution();
    let (ox, oy) = grid.origin();
    let w_m = grid.width() as f64 * res;
    let h_m = grid.height() as f64 * res;
    let width_px = w_m * PX_PER_METER;
    let height_px = h_m * PX_PER_METER;
    // World y grows upward, svg y downward.
    let tx = |x: f64| (x - ox) * PX_PER_METER;
    let ty = |y: f64| (oy + h_m - y) * PX_PER_METER;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width_px:.0}\" height=\"{height_px:.0}\" viewBox=\"0 0 {width_px:.2} {height_px:.2}\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{width_px:.2}\" height=\"{height_px:.2}\" fill=\"white\"/>"
    );

    // Occupancy: merge horizontal runs of same-state cells into one rect.
    let _ = writeln!(out, "<g id=\"occupancy\">");
    for iy in 0..grid.height() as i32 {
        let mut ix = 0i32;
        while ix < grid.width() as i32 {
            let state = grid.state(CellIndex::new(ix, iy));
            let run_start = ix;
            while ix < grid.width() as i32 && grid.state(CellIndex::new(ix, iy)) == state {
                ix += 1;
            }
            let fill = match state {
                CellState::Occupied => Some("#30303a"),
                CellState::Unknown => Some("#b9b9c0"),
                CellState::Free => None,
            };
            if let Some(fill) = fill {
                let x0 = tx(ox + run_start as f64 * res);
                let y0 = ty(oy + (iy as f64 + 1.0) * res);
                let w = (ix - run_start) as f64 * res * PX_PER_METER;
                let h = res * PX_PER_METER;
                let _ = writeln!(
                    out,
                    "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>"
                );
            }
        }
    }
    let _ = writeln!(out, "</g>");

    if let Some(corridor) = layers.corridor {
        let _ = writeln!(out, "<g id=\"corridor\" fill=\"#9fd8e8\" fill-opacity=\"0.5\">");
        for iy in 0..grid.height() as i32 {
            let mut ix = 0i32;
            while ix < grid.width() as i32 {
                if !corridor.contains(CellIndex::new(ix, iy)) {
                    ix += 1;
                    continue;
                }
                let run_start = ix;
                while ix < grid.width() as i32 && corridor.contains(CellIndex::new(ix, iy)) {
                    ix += 1;
                }
                let x0 = tx(ox + run_start as f64 * res);
                let y0 = ty(oy + (iy as f64 + 1.0) * res);
                let w = (ix - run_start) as f64 * res * PX_PER_METER;
                let h = res * PX_PER_METER;
                let _ = writeln!(
                    out,
                    "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{w:.2}\" height=\"{h:.2}\"/>"
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }

    if let Some(gvd) = layers.gvd {
        let _ = writeln!(out, "<g id=\"voronoi\" fill=\"#3050d8\">");
        for iy in 0..grid.height() as i32 {
            for ix in 0..grid.width() as i32 {
                let c = CellIndex::new(ix, iy);
                if gvd.is_voronoi(c) {
                    let x0 = tx(ox + ix as f64 * res);
                    let y0 = ty(oy + (iy as f64 + 1.0) * res);
                    let s = res * PX_PER_METER;
                    let _ = writeln!(
                        out,
                        "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{s:.2}\" height=\"{s:.2}\"/>"
                    );
                }
            }
        }
        let _ = writeln!(out, "</g>");
    }

    if let (Some(path), Some(half)) = (layers.smoothed, layers.footprint_half_width) {
        let _ = writeln!(
            out,
            "<g id=\"footprints\" fill=\"none\" stroke=\"#74c4e8\" stroke-width=\"1\">"
        );
        let stride = (path.len() / 40).max(1);
        for i in (0..path.len()).step_by(stride) {
            let p = path[i];
            let theta = if i + 1 < path.len() {
                (path[i + 1][1] - p[1]).atan2(path[i + 1][0] - p[0])
            } else if i > 0 {
                (p[1] - path[i - 1][1]).atan2(p[0] - path[i - 1][0])
            } else {
                0.0
            };
            let (c, s) = (theta.cos(), theta.sin());
            let corners = [
                (half, half),
                (half, -half),
                (-half, -half),
                (-half, half),
            ];
            let pts: Vec<String> = corners
                .iter()
                .map(|&(a, b)| {
                    let x = p[0] + a * c - b * s;
                    let y = p[1] + a * s + b * c;
                    format!("{:.2},{:.2}", tx(x), ty(y))
                })
                .collect();
            let _ = writeln!(out, "<polygon points=\"{}\"/>", pts.join(" "));
        }
        let _ = writeln!(out, "</g>");
    }

    if let Some(path) = layers.searched {
        if path.len() >= 2 {
            let pts: Vec<String> = path
                .iter()
                .map(|p| format!("{:.2},{:.2}", tx(p.x), ty(p.y)))
                .collect();
            let _ = writeln!(
                out,
                "<polyline id=\"searched\" fill=\"none\" stroke=\"#1faf4b\" stroke-width=\"2\" points=\"{}\"/>",
                pts.join(" ")
            );
        }
    }

    if let Some(path) = layers.smoothed {
        if path.len() >= 2 {
            let pts: Vec<String> = path
                .iter()
                .map(|p| format!("{:.2},{:.2}", tx(p[0]), ty(p[1])))
                .collect();
            let _ = writeln!(
                out,
                "<polyline id=\"smoothed\" fill=\"none\" stroke=\"#d83030\" stroke-width=\"2\" points=\"{}\"/>",
                pts.join(" ")
            );
        }
    }

    out.push_str("</svg>\n");
    out
}
