//! Scenario files: one planning problem per file, `key: value` per line.
//!
//! ```text
//! map: maze.pgm
//! start_x: 1.1
//! start_y: 1.1
//! start_theta: 0.0
//! goal_x: 18.9
//! goal_y: 18.9
//! goal_theta: 0.0
//! v_max: 1.5
//! omega_max: 1.0
//! a_max: 1.0
//! r_c: 0.566
//! d_o_min: 1.132
//! w_s: 10.0
//! w_r: 1.0
//! seed: 0
//! mode: corridor
//! ```
//!
//! Relative map paths resolve against the scenario file's directory. Only
//! `map` and the start/goal coordinates are mandatory.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::primitives::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Corridor,
    Full,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Corridor => "corridor",
            Mode::Full => "full",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corridor" => Ok(Mode::Corridor),
            "full" => Ok(Mode::Full),
            other => Err(format!("unknown mode {other:?} (expected corridor|full)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("scenario parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("scenario is missing required key {0:?}")]
    MissingKey(&'static str),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub map: PathBuf,
    pub start: Pose,
    pub goal: Pose,
    pub v_max: f64,
    pub omega_max: f64,
    pub a_max: f64,
    /// Circumscribed radius of the (square) robot footprint.
    pub r_c: f64,
    /// Safety threshold of the potential field; defaults to `2 r_c`.
    pub d_o_min: f64,
    pub w_s: f64,
    pub w_r: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Truncate the searched path to this arc length before smoothing.
    pub local_length: Option<f64>,
}

impl Scenario {
    /// Defaults for everything but the map and endpoints: 1.5 m/s linear
    /// cap, unit angular speed and acceleration, 0.8 m square footprint.
    pub fn new(map: PathBuf, start: Pose, goal: Pose) -> Self {
        let r_c = 0.566;
        Scenario {
            name: String::from("scenario"),
            map,
            start,
            goal,
            v_max: 1.5,
            omega_max: 1.0,
            a_max: 1.0,
            r_c,
            d_o_min: 2.0 * r_c,
            w_s: 10.0,
            w_r: 1.0,
            seed: 0,
            mode: Mode::Corridor,
            local_length: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut s = Self::parse(&text)?;
        s.name = path
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        if s.map.is_relative() {
            if let Some(dir) = path.parent() {
                s.map = dir.join(&s.map);
            }
        }
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut map: Option<PathBuf> = None;
        let mut start = [f64::NAN; 3];
        let mut goal = [f64::NAN; 3];
        let mut s = Scenario::new(PathBuf::new(), Pose::new(0.0, 0.0, 0.0), Pose::new(0.0, 0.0, 0.0));
        start[2] = 0.0;
        goal[2] = 0.0;
        let mut d_o_min: Option<f64> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once(':').ok_or_else(|| ScenarioError::Parse {
                line: lineno + 1,
                msg: format!("expected `key: value`, got {line:?}"),
            })?;
            let value = value.trim();
            let err = |msg: String| ScenarioError::Parse {
                line: lineno + 1,
                msg,
            };
            let num = |value: &str| -> Result<f64, ScenarioError> {
                value
                    .parse()
                    .map_err(|_| err(format!("bad number {value:?}")))
            };
            match key.trim() {
                "map" => map = Some(PathBuf::from(value)),
                "start_x" => start[0] = num(value)?,
                "start_y" => start[1] = num(value)?,
                "start_theta" => start[2] = num(value)?,
                "goal_x" => goal[0] = num(value)?,
                "goal_y" => goal[1] = num(value)?,
                "goal_theta" => goal[2] = num(value)?,
                "v_max" => s.v_max = num(value)?,
                "omega_max" => s.omega_max = num(value)?,
                "a_max" => s.a_max = num(value)?,
                "r_c" => s.r_c = num(value)?,
                "d_o_min" => d_o_min = Some(num(value)?),
                "w_s" => s.w_s = num(value)?,
                "w_r" => s.w_r = num(value)?,
                "seed" => {
                    s.seed = value
                        .parse()
                        .map_err(|_| err(format!("bad seed {value:?}")))?
                }
                "mode" => s.mode = value.parse().map_err(|e: String| err(e))?,
                "local_length" => s.local_length = Some(num(value)?),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        s.map = map.ok_or(ScenarioError::MissingKey("map"))?;
        for (what, v) in [("start_x", start[0]), ("start_y", start[1])] {
            if v.is_nan() {
                return Err(ScenarioError::MissingKey(match what {
                    "start_x" => "start_x",
                    _ => "start_y",
                }));
            }
        }
        if goal[0].is_nan() {
            return Err(ScenarioError::MissingKey("goal_x"));
        }
        if goal[1].is_nan() {
            return Err(ScenarioError::MissingKey("goal_y"));
        }
        s.start = Pose::new(start[0], start[1], start[2]);
        s.goal = Pose::new(goal[0], goal[1], goal[2]);
        s.d_o_min = d_o_min.unwrap_or(2.0 * s.r_c);
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("map: {}\n", self.map.display()));
        out.push_str(&format!("start_x: {}\n", self.start.x));
        out.push_str(&format!("start_y: {}\n", self.start.y));
        out.push_str(&format!("start_theta: {}\n", self.start.theta));
        out.push_str(&format!("goal_x: {}\n", self.goal.x));
        out.push_str(&format!("goal_y: {}\n", self.goal.y));
        out.push_str(&format!("goal_theta: {}\n", self.goal.theta));
        out.push_str(&format!("v_max: {}\n", self.v_max));
        out.push_str(&format!("omega_max: {}\n", self.omega_max));
        out.push_str(&format!("a_max: {}\n", self.a_max));
        out.push_str(&format!("r_c: {}\n", self.r_c));
        out.push_str(&format!("d_o_min: {}\n", self.d_o_min));
        out.push_str(&format!("w_s: {}\n", self.w_s));
        out.push_str(&format!("w_r: {}\n", self.w_r));
        out.push_str(&format!("seed: {}\n", self.seed));
        out.push_str(&format!("mode: {}\n", self.mode.as_str()));
        if let Some(l) = self.local_length {
            out.push_str(&format!("local_length: {l}\n"));
        }
        out
    }
}
