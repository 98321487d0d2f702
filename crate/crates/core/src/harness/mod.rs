//! Experiment runner: expands an [`ExperimentSpec`] into configurations,
//! runs seeded trials in parallel and reduces them into CSV tables.
//!
//! Every configuration of one experiment uses the same trial seeds
//! (`seed::trial_seed(master, trial)`), so policies and sweep points are
//! compared on common random numbers. Unmet trials count as `max_turns` in
//! the mean; the meeting rate reports how many actually met.

mod aggregate;
mod config;
mod table;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{self, Scenario};
use crate::channel::ChannelParams;
use crate::engine::{self, Placement, TraceRecord, TrialConfig, TrialResult};
use crate::policies::{Arm, PolicySpec};
use crate::seed::trial_seed;
use crate::{Error, Result};

pub use aggregate::{AggregateStats, Aggregator, TrialSummary};
pub use config::{parse_pairs, ExperimentSpec, KEYS};
pub use table::{fmt_num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    TwoPlayer,
    Multiplayer,
    SweepDelta,
    SweepPlayers,
    Bounds,
    Figure1,
    /// Density of the four arms' reward distributions around zero.
    Rewards,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::TwoPlayer => "two_player",
            Mode::Multiplayer => "multiplayer",
            Mode::SweepDelta => "sweep_delta",
            Mode::SweepPlayers => "sweep_players",
            Mode::Bounds => "bounds",
            Mode::Figure1 => "figure1",
            Mode::Rewards => "rewards",
        }
    }

    /// Whether the mode runs Monte Carlo trials (as opposed to closed forms).
    pub fn runs_trials(self) -> bool {
        matches!(self, Mode::TwoPlayer | Mode::Multiplayer | Mode::SweepDelta | Mode::SweepPlayers)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let m = match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "two_player" => Mode::TwoPlayer,
            "multiplayer" => Mode::Multiplayer,
            "sweep_delta" => Mode::SweepDelta,
            "sweep_players" => Mode::SweepPlayers,
            "bounds" => Mode::Bounds,
            "figure1" => Mode::Figure1,
            "rewards" => Mode::Rewards,
            other => return Err(format!("unknown mode `{other}`")),
        };
        Ok(m)
    }
}

/// One row of a trial experiment: a policy at one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigPoint {
    pub policy: PolicySpec,
    pub delta: f64,
    pub num_players: usize,
    pub trial: TrialConfig,
}

/// A trace line: the per-turn record tagged with where it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceLine {
    pub config: usize,
    pub trial: u64,
    #[serde(flatten)]
    pub record: TraceRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Per-configuration statistics of trial modes, in row order.
    pub stats: Vec<(ConfigPoint, AggregateStats)>,
    pub trace: Vec<TraceLine>,
}

/// Default trial cap: 50 Greedy bounds of the corner-to-corner scenario of
/// the placement square (or of the relative start, if farther).
pub fn default_max_turns(channel: &ChannelParams, area_side: f64, start: Option<(f64, f64)>) -> Result<u64> {
    let mut side = area_side;
    if let Some((x, y)) = start {
        side = side.max(x.abs()).max(y.abs());
    }
    let s = Scenario::new(side, side, *channel)?;
    let turns = 50.0 * analysis::greedy_meeting_bound(&s);
    Ok(turns.ceil().clamp(1.0, u64::MAX as f64) as u64)
}

impl ExperimentSpec {
    /// Expands the spec into one configuration per (sweep point, policy).
    /// The configuration index is the row index of the output table.
    pub fn config_points(&self) -> Result<Vec<ConfigPoint>> {
        let deltas: Vec<f64> = match self.mode {
            Mode::SweepDelta => self.sweep.clone(),
            _ => vec![self.channel.delta],
        };
        let counts: Vec<usize> = match self.mode {
            Mode::SweepPlayers => self.sweep.iter().map(|n| *n as usize).collect(),
            _ => vec![self.num_players],
        };
        let mut out = Vec::new();
        for &delta in &deltas {
            let channel = ChannelParams { delta, ..self.channel };
            let meet_radius = self.meet_radius.unwrap_or(2.0 * delta);
            let max_turns = match self.max_turns {
                Some(m) => m,
                None => default_max_turns(&channel, self.area_side, self.start)?,
            };
            for &n in &counts {
                for policy in self.policy_specs() {
                    let placement = match self.start {
                        Some((x, y)) => Placement::Relative { x, y },
                        None => Placement::Uniform,
                    };
                    let trial = TrialConfig {
                        channel,
                        num_players: n,
                        area_side: self.area_side,
                        placement,
                        meet_radius,
                        max_turns,
                        avg_window: self.avg_window,
                        seed: 0,
                        policies: vec![policy],
                        record_trace: self.trace,
                    };
                    trial.validate().map_err(|e| match e {
                        Error::InvalidParameter { name, reason } => Error::config(name, reason),
                        other => other,
                    })?;
                    out.push(ConfigPoint { policy, delta, num_players: n, trial });
                }
            }
        }
        Ok(out)
    }
}

fn run_point(mode: Mode, point: &ConfigPoint, master_seed: u64, trial: u64) -> Result<TrialResult> {
    let cfg = TrialConfig { seed: trial_seed(master_seed, trial), ..point.trial.clone() };
    match mode {
        Mode::TwoPlayer | Mode::SweepDelta => engine::run_two_player(&cfg),
        _ => engine::run_multiplayer(&cfg),
    }
}

/// Runs trial `trial` of configuration `config` on its own. Produces exactly
/// the result the same trial has inside a full run.
pub fn replay_trial(spec: &ExperimentSpec, config: usize, trial: u64) -> Result<TrialResult> {
    spec.validate()?;
    if !spec.mode.runs_trials() {
        return Err(Error::Contract(format!("mode {} runs no trials", spec.mode)));
    }
    let points = spec.config_points()?;
    let point = points
        .get(config)
        .ok_or_else(|| Error::Contract(format!("configuration {config} out of range 0..{}", points.len())))?;
    if trial >= spec.trials {
        return Err(Error::Contract(format!("trial {trial} out of range 0..{}", spec.trials)));
    }
    run_point(spec.mode, point, spec.seed, trial)
}

/// Runs the experiment described by `spec` and builds its output table.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    spec.validate()?;
    match spec.mode {
        Mode::Bounds => Ok(plain(bounds_table(spec)?)),
        Mode::Figure1 => Ok(plain(figure1_table(spec)?)),
        Mode::Rewards => Ok(plain(rewards_table(spec)?)),
        _ => run_trials(spec),
    }
}

/// [`run_experiment`] in `sweep_delta` mode.
pub fn sweep_delta(spec: &ExperimentSpec) -> Result<Outcome> {
    run_experiment(&ExperimentSpec { mode: Mode::SweepDelta, ..spec.clone() })
}

/// [`run_experiment`] in `sweep_players` mode.
pub fn sweep_players(spec: &ExperimentSpec) -> Result<Outcome> {
    run_experiment(&ExperimentSpec { mode: Mode::SweepPlayers, ..spec.clone() })
}

fn plain(table: Table) -> Outcome {
    Outcome { table, stats: Vec::new(), trace: Vec::new() }
}

fn run_trials(spec: &ExperimentSpec) -> Result<Outcome> {
    let points = spec.config_points()?;
    let jobs: Vec<(usize, u64)> = (0..points.len()).flat_map(|c| (0..spec.trials).map(move |t| (c, t))).collect();
    let results: Vec<Result<TrialResult>> =
        jobs.par_iter().map(|&(c, t)| run_point(spec.mode, &points[c], spec.seed, t)).collect();

    let mut aggs = vec![Aggregator::default(); points.len()];
    let mut trace = Vec::new();
    for (&(c, t), r) in jobs.iter().zip(results) {
        let r = r?;
        aggs[c].add(t, TrialSummary::from_result(&r, spec.mode == Mode::TwoPlayer || spec.mode == Mode::SweepDelta));
        if let Some(records) = r.trace {
            trace.extend(records.into_iter().map(|record| TraceLine { config: c, trial: t, record }));
        }
    }

    let two_player = matches!(spec.mode, Mode::TwoPlayer | Mode::SweepDelta);
    let mut header: Vec<&str> = match spec.mode {
        Mode::SweepDelta => vec!["delta", "policy"],
        Mode::TwoPlayer => vec!["policy"],
        _ => vec!["num_players", "policy"],
    };
    header.extend(["trials", "mean_turns", "std_err", "meeting_rate"]);
    if two_player {
        header.push("mean_m");
    }
    header.push("mean_distance");

    let mut table = Table::new(&header);
    let mut stats = Vec::new();
    for (point, agg) in points.into_iter().zip(aggs) {
        let s = agg.finish()?;
        let mut row = match spec.mode {
            Mode::SweepDelta => vec![fmt_num(point.delta), point.policy.kind().to_string()],
            Mode::TwoPlayer => vec![point.policy.kind().to_string()],
            _ => vec![point.num_players.to_string(), point.policy.kind().to_string()],
        };
        row.extend([s.trials.to_string(), fmt_num(s.mean_turns), fmt_num(s.std_err), fmt_num(s.meeting_rate)]);
        if two_player {
            row.push(s.mean_m.map(fmt_num).unwrap_or_default());
        }
        row.push(fmt_num(s.mean_distance));
        table.push(row);
        stats.push((point, s));
    }
    Ok(Outcome { table, stats, trace })
}

/// Meeting-time bounds for each scenario.
pub fn bounds_table(spec: &ExperimentSpec) -> Result<Table> {
    let mut t = Table::new(&[
        "x",
        "y",
        "delta",
        "sigma",
        "n_p",
        "x_c",
        "z",
        "greedy_bound",
        "greedy_traversal",
        "roptimal_bound",
    ]);
    for &(x, y) in &spec.scenarios {
        let s = Scenario::new(x, y, spec.channel)?;
        t.push(vec![
            fmt_num(x),
            fmt_num(y),
            fmt_num(spec.channel.delta),
            fmt_num(spec.channel.sigma),
            fmt_num(spec.channel.n_p),
            fmt_num(spec.channel.x_c),
            fmt_num(spec.z),
            fmt_num(analysis::greedy_meeting_bound(&s)),
            fmt_num(analysis::greedy_expected_traversal(&s)),
            fmt_num(analysis::roptimal_meeting_bound(&s, spec.z)?),
        ]);
    }
    Ok(t)
}

fn scenario_label(x: f64, y: f64) -> String {
    format!("p_x{}_y{}", fmt_num(x), fmt_num(y))
}

/// Probability that the `+x` arm's averaged reward is positive, one column
/// per scenario, one row per averaging length.
pub fn figure1_table(spec: &ExperimentSpec) -> Result<Table> {
    let scenarios =
        spec.scenarios.iter().map(|&(x, y)| Scenario::new(x, y, spec.channel)).collect::<Result<Vec<_>>>()?;
    let mut header = vec!["n".to_string()];
    header.extend(spec.scenarios.iter().map(|&(x, y)| scenario_label(x, y)));
    let mut t = Table::from_strings(header);
    for &n in &spec.n_values {
        let mut row = vec![n.to_string()];
        for s in &scenarios {
            row.push(fmt_num(analysis::prob_positive(Arm::PLUS_X, s, n)?));
        }
        t.push(row);
    }
    Ok(t)
}

fn normal_pdf(x: f64, g: &analysis::GaussianSpec) -> f64 {
    let sd = g.std_dev();
    let z = (x - g.mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Reward densities of the four arms on a grid spanning three standard
/// deviations around zero.
pub fn rewards_table(spec: &ExperimentSpec) -> Result<Table> {
    let (x, y) = spec.start.ok_or_else(|| Error::config("start_x", "rewards mode needs a start"))?;
    let s = Scenario::new(x, y, spec.channel)?;
    let dists: Vec<_> =
        [Arm::Up, Arm::Down, Arm::Right, Arm::Left].iter().map(|a| analysis::reward_distribution(*a, &s)).collect();
    let span = 3.0 * dists[0].std_dev();
    if !(span > 0.0) {
        return Err(Error::config("sigma", "reward densities need sigma > 0"));
    }
    let mut t = Table::new(&["reward", "pdf_up", "pdf_down", "pdf_right", "pdf_left"]);
    let k = spec.grid_points - 1;
    for i in 0..=k {
        let r = -span + 2.0 * span * i as f64 / k as f64;
        let mut row = vec![fmt_num(r)];
        row.extend(dists.iter().map(|g| fmt_num(normal_pdf(r, g))));
        t.push(row);
    }
    Ok(t)
}
