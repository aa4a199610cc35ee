//! Occupancy grid storage, map file ingestion, and world/cell transforms.
//!
//! Maps are stored as binary portable graymaps (magic `P5`) with a plain-text
//! sidecar carrying the metric metadata. The sidecar lives next to the image
//! with the extension `.meta` and holds one `key: value` pair per line:
//!
//! ```text
//! resolution: 0.1
//! origin_x: 0.0
//! origin_y: 0.0
//! negate: 0
//! occupied_thresh: 0.5
//! free_thresh: 0.95
//! ```
//!
//! Gray values are interpreted as fractions of `maxval`: a pixel at or below
//! `occupied_thresh` is occupied, at or above `free_thresh` is free, and
//! anything in between is unknown. Row 0 of the grid is the *bottom* row in
//! the world frame; the loader flips the image rows (PGM stores the top row
//! first) so no vertical flips leak into planning code.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// State of a single grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

/// How planning queries treat `Unknown` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPolicy {
    /// Unknown cells block the robot (the conservative default).
    #[default]
    Obstacle,
    /// Unknown cells are traversable.
    Free,
}

/// Integer cell coordinates; signed so that neighbor and swath offsets can be
/// expressed without wrapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellIndex {
    pub ix: i32,
    pub iy: i32,
}

impl CellIndex {
    pub const fn new(ix: i32, iy: i32) -> Self {
        Self { ix, iy }
    }

    /// Offset this index by a cell delta.
    pub const fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.ix + dx, self.iy + dy)
    }
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.ix, self.iy)
    }
}

/// 8-connected neighborhood offsets, axis moves first, fixed order for
/// deterministic searches.
pub const NEIGHBORS_8: [(i32, i32); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

#[derive(Debug, Error)]
pub enum GridError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("structural error in {path}: {msg}")]
    Structure { path: PathBuf, msg: String },
    #[error("world point ({x}, {y}) is outside the map bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("cell {0} is outside the map")]
    CellOutOfBounds(CellIndex),
}

/// A 2-D occupancy grid with metric metadata.
///
/// Immutable after load in normal operation; the mutators exist for the
/// incremental distance-map tests and the maze generator.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: (f64, f64),
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    /// Create a grid filled with a single state.
    pub fn filled(
        width: usize,
        height: usize,
        resolution: f64,
        origin: (f64, f64),
        state: CellState,
    ) -> Self {
        assert!(width >= 1 && height >= 1, "grid must be at least 1x1");
        assert!(resolution > 0.0, "resolution must be positive");
        Self {
            width,
            height,
            resolution,
            origin,
            cells: vec![state; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// World coordinates of the corner of cell (0, 0).
    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn in_bounds(&self, c: CellIndex) -> bool {
        c.ix >= 0 && c.iy >= 0 && (c.ix as usize) < self.width && (c.iy as usize) < self.height
    }

    /// Row-major storage index of an in-bounds cell.
    pub fn index_of(&self, c: CellIndex) -> usize {
        debug_assert!(self.in_bounds(c));
        c.iy as usize * self.width + c.ix as usize
    }

    pub fn state(&self, c: CellIndex) -> CellState {
        self.cells[self.index_of(c)]
    }

    pub fn set_state(&mut self, c: CellIndex, state: CellState) {
        let i = self.index_of(c);
        self.cells[i] = state;
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    /// Whether the robot may occupy this cell under the given policy for
    /// unknown space.
    pub fn is_traversable(&self, c: CellIndex, treat_unknown_as: UnknownPolicy) -> bool {
        match self.state(c) {
            CellState::Free => true,
            CellState::Occupied => false,
            CellState::Unknown => treat_unknown_as == UnknownPolicy::Free,
        }
    }

    /// Cell containing the world point, floor quantization.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Result<CellIndex, GridError> {
        let fx = (x - self.origin.0) / self.resolution;
        let fy = (y - self.origin.1) / self.resolution;
        let ix = fx.floor();
        let iy = fy.floor();
        if ix < 0.0 || iy < 0.0 || ix >= self.width as f64 || iy >= self.height as f64 {
            return Err(GridError::OutOfBounds { x, y });
        }
        Ok(CellIndex::new(ix as i32, iy as i32))
    }

    /// World coordinates of a cell center.
    pub fn cell_to_world(&self, c: CellIndex) -> (f64, f64) {
        (
            self.origin.0 + (c.ix as f64 + 0.5) * self.resolution,
            self.origin.1 + (c.iy as f64 + 0.5) * self.resolution,
        )
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&s| s == state).count()
    }

    /// Load a map from a P5 graymap plus its `.meta` sidecar.
    pub fn load(path: &Path) -> Result<Self, GridError> {
        let bytes = fs::read(path).map_err(|source| GridError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let meta_path = sidecar_path(path);
        let meta_text = fs::read_to_string(&meta_path).map_err(|source| GridError::Io {
            path: meta_path.clone(),
            source,
        })?;
        let meta = MapMeta::parse(&meta_text, &meta_path)?;
        let pgm = Pgm::parse(&bytes, path)?;

        let mut cells = vec![CellState::Unknown; pgm.width * pgm.height];
        for iy in 0..pgm.height {
            // PGM stores the top image row first; grid row 0 is the bottom.
            let src_row = pgm.height - 1 - iy;
            for ix in 0..pgm.width {
                let raw = pgm.data[src_row * pgm.width + ix] as f64;
                let gray = if meta.negate != 0 {
                    pgm.maxval as f64 - raw
                } else {
                    raw
                };
                let frac = gray / pgm.maxval as f64;
                cells[iy * pgm.width + ix] = if frac <= meta.occupied_thresh {
                    CellState::Occupied
                } else if frac >= meta.free_thresh {
                    CellState::Free
                } else {
                    CellState::Unknown
                };
            }
        }

        Ok(Self {
            width: pgm.width,
            height: pgm.height,
            resolution: meta.resolution,
            origin: (meta.origin_x, meta.origin_y),
            cells,
        })
    }

    /// Write the map as a P5 graymap plus sidecar. Occupied cells become
    /// gray 0, free cells 255 and unknown cells 205, which round-trips
    /// through the default thresholds.
    pub fn save(&self, path: &Path) -> Result<(), GridError> {
        let io_err = |source| GridError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = Vec::with_capacity(self.cells.len() + 32);
        write!(out, "P5\n{} {}\n255\n", self.width, self.height).map_err(io_err)?;
        for iy in (0..self.height).rev() {
            for ix in 0..self.width {
                let v: u8 = match self.cells[iy * self.width + ix] {
                    CellState::Occupied => 0,
                    CellState::Unknown => 205,
                    CellState::Free => 255,
                };
                out.push(v);
            }
        }
        fs::write(path, out).map_err(io_err)?;

        let meta_path = sidecar_path(path);
        let meta = format!(
            "resolution: {}\norigin_x: {}\norigin_y: {}\nnegate: 0\noccupied_thresh: 0.5\nfree_thresh: 0.95\n",
            self.resolution, self.origin.0, self.origin.1
        );
        fs::write(&meta_path, meta).map_err(|source| GridError::Io {
            path: meta_path.clone(),
            source,
        })
    }
}

/// Sidecar path for a map image: same stem, `.meta` extension.
pub fn sidecar_path(map_path: &Path) -> PathBuf {
    map_path.with_extension("meta")
}

struct MapMeta {
    resolution: f64,
    origin_x: f64,
    origin_y: f64,
    negate: i32,
    occupied_thresh: f64,
    free_thresh: f64,
}

impl MapMeta {
    fn parse(text: &str, path: &Path) -> Result<Self, GridError> {
        let mut meta = MapMeta {
            resolution: f64::NAN,
            origin_x: 0.0,
            origin_y: 0.0,
            negate: 0,
            occupied_thresh: 0.5,
            free_thresh: 0.95,
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once(':').ok_or_else(|| GridError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg: format!("expected `key: value`, got {line:?}"),
            })?;
            let value = value.trim();
            let parse_err = |msg: String| GridError::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                msg,
            };
            match key.trim() {
                "resolution" => {
                    meta.resolution = value
                        .parse()
                        .map_err(|_| parse_err(format!("bad resolution {value:?}")))?
                }
                "origin_x" => {
                    meta.origin_x = value
                        .parse()
                        .map_err(|_| parse_err(format!("bad origin_x {value:?}")))?
                }
                "origin_y" => {
                    meta.origin_y = value
                        .parse()
                        .map_err(|_| parse_err(format!("bad origin_y {value:?}")))?
                }
                "negate" => {
                    meta.negate = value
                        .parse()
                        .map_err(|_| parse_err(format!("bad negate {value:?}")))?
                }
                "occupied_thresh" => {
                    meta.occupied_thresh = value
                        .parse()
                        .map_err(|_| parse_err(format!("bad occupied_thresh {value:?}")))?
                }
                "free_thresh" => {
                    meta.free_thresh = value
                        .parse()
                        .map_err(|_| parse_err(format!("bad free_thresh {value:?}")))?
                }
                other => {
                    return Err(parse_err(format!("unknown key {other:?}")));
                }
            }
        }
        if !meta.resolution.is_finite() || meta.resolution <= 0.0 {
            return Err(GridError::Structure {
                path: path.to_path_buf(),
                msg: "sidecar must set a positive resolution".into(),
            });
        }
        Ok(meta)
    }
}

struct Pgm {
    width: usize,
    height: usize,
    maxval: u16,
    data: Vec<u8>,
}

impl Pgm {
    fn parse(bytes: &[u8], path: &Path) -> Result<Self, GridError> {
        let mut cursor = 0usize;
        let mut line = 1usize;
        let parse_err = |line: usize, msg: String| GridError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };

        // Header tokens are separated by whitespace; `#` starts a comment
        // that runs to end of line.
        let next_token = |cursor: &mut usize, line: &mut usize| -> Result<String, GridError> {
            loop {
                match bytes.get(*cursor) {
                    None => return Err(parse_err(*line, "unexpected end of file".into())),
                    Some(b'#') => {
                        while let Some(&b) = bytes.get(*cursor) {
                            *cursor += 1;
                            if b == b'\n' {
                                *line += 1;
                                break;
                            }
                        }
                    }
                    Some(&b) if b.is_ascii_whitespace() => {
                        if b == b'\n' {
                            *line += 1;
                        }
                        *cursor += 1;
                    }
                    Some(_) => break,
                }
            }
            let start = *cursor;
            while let Some(&b) = bytes.get(*cursor) {
                if b.is_ascii_whitespace() || b == b'#' {
                    break;
                }
                *cursor += 1;
            }
            Ok(String::from_utf8_lossy(&bytes[start..*cursor]).into_owned())
        };

        let magic = next_token(&mut cursor, &mut line)?;
        if magic != "P5" {
            return Err(parse_err(line, format!("expected magic P5, got {magic:?}")));
        }
        let width: usize = next_token(&mut cursor, &mut line)?
            .parse()
            .map_err(|_| parse_err(line, "bad width".into()))?;
        let height: usize = next_token(&mut cursor, &mut line)?
            .parse()
            .map_err(|_| parse_err(line, "bad height".into()))?;
        let maxval: u16 = next_token(&mut cursor, &mut line)?
            .parse()
            .map_err(|_| parse_err(line, "bad maxval".into()))?;
        if width == 0 || height == 0 {
            return Err(GridError::Structure {
                path: path.to_path_buf(),
                msg: format!("degenerate dimensions {width}x{height}"),
            });
        }
        if maxval == 0 || maxval > 255 {
            return Err(parse_err(line, format!("unsupported maxval {maxval}")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        match bytes.get(cursor) {
            Some(b) if b.is_ascii_whitespace() => cursor += 1,
            _ => return Err(parse_err(line, "missing separator before raster".into())),
        }
        let expected = width * height;
        let data = &bytes[cursor..];
        if data.len() != expected {
            return Err(GridError::Structure {
                path: path.to_path_buf(),
                msg: format!(
                    "raster holds {} bytes, header promises {expected}",
                    data.len()
                ),
            });
        }
        Ok(Pgm {
            width,
            height,
            maxval,
            data: data.to_vec(),
        })
    }
}
