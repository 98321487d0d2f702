//! `key = value` experiment files.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Lists are comma separated. Later assignments override earlier ones, which
//! is how command-line overrides are layered on top of a file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::{ChannelParams, LogBase};
use crate::policies::{PolicyKind, PolicySpec, DEFAULT_A, DEFAULT_EPSILON};
use crate::{Error, Result};

use super::Mode;

/// Every key accepted in a config file or as an override.
pub const KEYS: &[&str] = &[
    "mode",
    "policy",
    "policies",
    "a",
    "epsilon",
    "p_i",
    "d_0",
    "n_p",
    "sigma",
    "x_c",
    "delta",
    "log_base",
    "num_players",
    "area_side",
    "start_x",
    "start_y",
    "meet_radius",
    "max_turns",
    "avg_window",
    "trials",
    "seed",
    "sweep",
    "z",
    "n_values",
    "scenarios",
    "grid_points",
    "out",
    "trace",
    "trace_out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub mode: Mode,
    pub channel: ChannelParams,
    pub policies: Vec<PolicyKind>,
    pub a: f64,
    pub epsilon: f64,
    pub num_players: usize,
    pub area_side: f64,
    /// Relative start of player 1 for two-player runs; uniform placement
    /// when absent.
    pub start: Option<(f64, f64)>,
    /// Defaults to `2 delta` of each configuration.
    pub meet_radius: Option<f64>,
    /// Defaults to 50 Greedy bounds of the corner-to-corner scenario.
    pub max_turns: Option<u64>,
    pub avg_window: usize,
    pub trials: u64,
    pub seed: u64,
    pub sweep: Vec<f64>,
    pub z: f64,
    pub n_values: Vec<u64>,
    pub scenarios: Vec<(f64, f64)>,
    pub grid_points: usize,
    pub out: Option<PathBuf>,
    pub trace: bool,
    pub trace_out: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            mode: Mode::TwoPlayer,
            channel: ChannelParams::default(),
            policies: vec![PolicyKind::Greedy],
            a: DEFAULT_A,
            epsilon: DEFAULT_EPSILON,
            num_players: 2,
            area_side: 200.0,
            start: None,
            meet_radius: None,
            max_turns: None,
            avg_window: 1,
            trials: 100,
            seed: 0,
            sweep: Vec::new(),
            z: crate::analysis::DEFAULT_Z,
            n_values: vec![1, 10, 100, 1_000, 10_000, 100_000, 1_000_000],
            scenarios: vec![(40.0, 70.0), (100.0, 60.0), (60.0, 60.0)],
            grid_points: 201,
            out: None,
            trace: false,
            trace_out: None,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::config(key, format!("cannot parse `{v}`: {e}")))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| num(key, s)).collect()
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(key, format!("expected true or false, got `{v}`"))),
    }
}

/// Splits `text` into `(key, value)` assignments.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::config(line, format!("line {}: expected `key = value`", lineno + 1)));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentSpec {
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut spec = Self::default();
        spec.apply_pairs(parse_pairs(text)?)?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_config_str(&text)
    }

    pub fn apply_pairs<I, K, V>(&mut self, pairs: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in pairs {
            self.set(k.as_ref(), v.as_ref())?;
        }
        Ok(())
    }

    /// Applies one assignment. Unknown keys and unparsable values are
    /// reported with the key name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let c = &mut self.channel;
        match key {
            "mode" => self.mode = v.parse().map_err(|e| Error::config(key, e))?,
            "policy" | "policies" => {
                let kinds = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<PolicyKind>().map_err(|e| Error::config(key, e)))
                    .collect::<Result<Vec<_>>>()?;
                if kinds.is_empty() {
                    return Err(Error::config(key, "needs at least one policy"));
                }
                self.policies = kinds;
            }
            "a" => self.a = num(key, v)?,
            "epsilon" => self.epsilon = num(key, v)?,
            "p_i" => c.p_i = num(key, v)?,
            "d_0" => c.d_0 = num(key, v)?,
            "n_p" => c.n_p = num(key, v)?,
            "sigma" => c.sigma = num(key, v)?,
            "x_c" => c.x_c = num(key, v)?,
            "delta" => c.delta = num(key, v)?,
            "log_base" => c.log_base = v.parse::<LogBase>().map_err(|e| Error::config(key, e))?,
            "num_players" => self.num_players = num(key, v)?,
            "area_side" => self.area_side = num(key, v)?,
            "start_x" => self.start = Some((num(key, v)?, self.start.map_or(0.0, |s| s.1))),
            "start_y" => self.start = Some((self.start.map_or(0.0, |s| s.0), num(key, v)?)),
            "meet_radius" => self.meet_radius = Some(num(key, v)?),
            "max_turns" => {
                self.max_turns = if v == "auto" { None } else { Some(num(key, v)?) };
            }
            "avg_window" => self.avg_window = num(key, v)?,
            "trials" => self.trials = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "sweep" => self.sweep = list(key, v)?,
            "z" => self.z = num(key, v)?,
            "n_values" => self.n_values = list(key, v)?,
            "scenarios" => {
                self.scenarios = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        let (x, y) = s
                            .split_once(':')
                            .ok_or_else(|| Error::config(key, format!("expected `x:y`, got `{s}`")))?;
                        Ok((num(key, x.trim())?, num(key, y.trim())?))
                    })
                    .collect::<Result<_>>()?;
            }
            "grid_points" => self.grid_points = num(key, v)?,
            "out" => self.out = (!v.is_empty()).then(|| PathBuf::from(v)),
            "trace" => self.trace = boolean(key, v)?,
            "trace_out" => self.trace_out = (!v.is_empty()).then(|| PathBuf::from(v)),
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    pub fn policy_specs(&self) -> Vec<PolicySpec> {
        self.policies.iter().map(|k| PolicySpec::new(*k, self.a, self.epsilon)).collect()
    }

    /// Checks everything that can be checked before running. Errors name
    /// the offending key.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::InvalidParameter { name, reason } => Error::config(name, reason),
            other => other,
        };
        self.channel.validate().map_err(wrap)?;
        for p in self.policy_specs() {
            p.validate().map_err(wrap)?;
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        if self.num_players < 2 {
            return Err(Error::config("num_players", "must be >= 2"));
        }
        if !(self.area_side > 0.0 && self.area_side.is_finite()) {
            return Err(Error::config("area_side", "must be > 0"));
        }
        if let Some(r) = self.meet_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config("meet_radius", "must be > 0"));
            }
            if self.start.is_none() && r >= self.area_side {
                return Err(Error::config("meet_radius", "must be below area_side"));
            }
        }
        if self.max_turns == Some(0) {
            return Err(Error::config("max_turns", "must be > 0"));
        }
        if self.avg_window == 0 {
            return Err(Error::config("avg_window", "must be >= 1"));
        }
        if !(self.z > 0.0 && self.z.is_finite()) {
            return Err(Error::config("z", "must be > 0"));
        }
        match self.mode {
            Mode::TwoPlayer => {
                if self.num_players != 2 {
                    return Err(Error::config("num_players", "two_player mode needs exactly 2 players"));
                }
            }
            Mode::Multiplayer => {
                if self.start.is_some() && self.num_players != 2 {
                    return Err(Error::config("start_x", "a relative start needs exactly 2 players"));
                }
            }
            Mode::SweepDelta => {
                if self.sweep.is_empty() {
                    return Err(Error::config("sweep", "sweep_delta needs at least one delta"));
                }
                if let Some(bad) = self.sweep.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
                    return Err(Error::config("sweep", format!("delta values must be > 0, got {bad}")));
                }
                if self.num_players != 2 {
                    return Err(Error::config("num_players", "sweep_delta runs two-player trials"));
                }
            }
            Mode::SweepPlayers => {
                if self.sweep.is_empty() {
                    return Err(Error::config("sweep", "sweep_players needs at least one player count"));
                }
                if let Some(bad) = self.sweep.iter().find(|n| !(**n >= 2.0 && n.fract() == 0.0)) {
                    return Err(Error::config("sweep", format!("player counts must be integers >= 2, got {bad}")));
                }
                if self.start.is_some() {
                    return Err(Error::config("start_x", "sweep_players uses uniform placement"));
                }
            }
            Mode::Bounds | Mode::Figure1 => {
                if self.scenarios.is_empty() {
                    return Err(Error::config("scenarios", "needs at least one scenario"));
                }
                if self.mode == Mode::Figure1 && (self.n_values.is_empty() || self.n_values.contains(&0)) {
                    return Err(Error::config("n_values", "needs values >= 1"));
                }
            }
            Mode::Rewards => {
                if self.start.is_none() {
                    return Err(Error::config("start_x", "rewards mode needs start_x and start_y"));
                }
                if self.grid_points < 2 {
                    return Err(Error::config("grid_points", "must be >= 2"));
                }
            }
        }
        Ok(())
    }
}
