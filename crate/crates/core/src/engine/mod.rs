//! Turn-synchronous trials.
//!
//! A turn is: check for meetings, advance every link's shadowing and sample
//! RSS, let every policy pick an arm, then move everyone by `delta` at once.
//! Positions are kept as integer step offsets from the start so coordinates
//! stay exactly on the `delta` lattice.

mod multiplayer;
mod trace;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, LinkState};
use crate::policies::{Arm, Policy, PolicySpec};
use crate::seed::{placement_rng, player_rng, TrialRng};
use crate::{Error, Result};

pub use multiplayer::{run_multiplayer, simulate_multiplayer};
pub use trace::{write_trace, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A position expressed as a start point plus whole steps of `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LatticePos {
    origin: Position,
    kx: i64,
    ky: i64,
}

impl LatticePos {
    pub(crate) fn new(origin: Position) -> Self {
        Self { origin, kx: 0, ky: 0 }
    }

    pub(crate) fn step(&mut self, arm: Arm) {
        match arm {
            Arm::Up => self.ky += 1,
            Arm::Down => self.ky -= 1,
            Arm::Right => self.kx += 1,
            Arm::Left => self.kx -= 1,
        }
    }

    pub(crate) fn at(&self, delta: f64) -> Position {
        Position { x: self.origin.x + self.kx as f64 * delta, y: self.origin.y + self.ky as f64 * delta }
    }
}

/// How players are placed at the start of a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Placement {
    /// Independent uniform positions in `[0, area_side]^2`, drawn in player
    /// order from the trial's placement stream.
    Uniform,
    /// Two players: player 0 at the origin, player 1 at `(x, y)`.
    Relative { x: f64, y: f64 },
    /// Explicit start positions, one per player.
    Fixed(Vec<Position>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub channel: ChannelParams,
    pub num_players: usize,
    pub area_side: f64,
    pub placement: Placement,
    pub meet_radius: f64,
    pub max_turns: u64,
    /// RSS averaging window used for target selection.
    pub avg_window: usize,
    /// Trial seed; see [`crate::seed`].
    pub seed: u64,
    /// One spec shared by all players, or one per player.
    pub policies: Vec<PolicySpec>,
    pub record_trace: bool,
}

impl TrialConfig {
    /// Two players with the given policy, relative start `(x, y)`, default
    /// meeting radius `2 delta`.
    pub fn two_player(channel: ChannelParams, policy: PolicySpec, x: f64, y: f64, max_turns: u64) -> Self {
        Self {
            channel,
            num_players: 2,
            area_side: 200.0,
            placement: Placement::Relative { x, y },
            meet_radius: 2.0 * channel.delta,
            max_turns,
            avg_window: 1,
            seed: 0,
            policies: vec![policy],
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.num_players < 2 {
            return Err(Error::invalid("num_players", format!("must be >= 2, got {}", self.num_players)));
        }
        if !(self.meet_radius > 0.0 && self.meet_radius.is_finite()) {
            return Err(Error::invalid("meet_radius", format!("must be > 0, got {}", self.meet_radius)));
        }
        if self.max_turns == 0 {
            return Err(Error::invalid("max_turns", "must be > 0"));
        }
        if self.avg_window == 0 {
            return Err(Error::invalid("avg_window", "must be >= 1"));
        }
        match &self.placement {
            Placement::Uniform => {
                if !(self.area_side > 0.0 && self.area_side.is_finite()) {
                    return Err(Error::invalid("area_side", format!("must be > 0, got {}", self.area_side)));
                }
                if self.meet_radius >= self.area_side {
                    return Err(Error::invalid(
                        "meet_radius",
                        format!("must be below area_side {}, got {}", self.area_side, self.meet_radius),
                    ));
                }
            }
            Placement::Relative { x, y } => {
                if self.num_players != 2 {
                    return Err(Error::invalid("num_players", "a relative start needs exactly 2 players"));
                }
                if !(x.is_finite() && y.is_finite()) {
                    return Err(Error::invalid("start", "relative start must be finite"));
                }
            }
            Placement::Fixed(ps) => {
                if ps.len() != self.num_players {
                    return Err(Error::invalid(
                        "placement",
                        format!("{} positions for {} players", ps.len(), self.num_players),
                    ));
                }
            }
        }
        if self.policies.len() != 1 && self.policies.len() != self.num_players {
            return Err(Error::invalid(
                "policies",
                format!("need 1 or {} policy specs, got {}", self.num_players, self.policies.len()),
            ));
        }
        for p in &self.policies {
            p.validate()?;
        }
        Ok(())
    }

    pub fn policy_for(&self, player: usize) -> &PolicySpec {
        if self.policies.len() == 1 {
            &self.policies[0]
        } else {
            &self.policies[player]
        }
    }

    /// Start positions for this trial's seed.
    pub fn start_positions(&self) -> Vec<Position> {
        match &self.placement {
            Placement::Uniform => {
                let mut rng = placement_rng(self.seed);
                (0..self.num_players)
                    .map(|_| {
                        let x = rng.random::<f64>() * self.area_side;
                        let y = rng.random::<f64>() * self.area_side;
                        Position { x, y }
                    })
                    .collect()
            }
            Placement::Relative { x, y } => vec![Position::new(0.0, 0.0), Position::new(*x, *y)],
            Placement::Fixed(ps) => ps.clone(),
        }
    }

    pub fn player_rngs(&self) -> Vec<TrialRng> {
        (0..self.num_players).map(|p| player_rng(self.seed, p)).collect()
    }

    /// RSS is never sampled closer than `d_0 / 100`.
    pub(crate) fn sampling_distance(&self, d: f64) -> f64 {
        d.max(self.channel.d_0 / 100.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub met: bool,
    /// Turns played before the meeting, or `max_turns` if none happened.
    pub turns: u64,
    /// Sum over turns of the number of independently moving groups.
    pub group_steps: u64,
    pub traversed_distance: f64,
    pub start_positions: Vec<Position>,
    pub final_positions: Vec<Position>,
    /// Group leader of each player at the end of the trial.
    pub final_leaders: Vec<usize>,
    pub trace: Option<Vec<TraceRecord>>,
}

/// Runs a two-player trial from the configured placement and seed.
pub fn run_two_player(cfg: &TrialConfig) -> Result<TrialResult> {
    cfg.validate()?;
    if cfg.num_players != 2 {
        return Err(Error::Contract(format!("two-player loop called with {} players", cfg.num_players)));
    }
    let start = cfg.start_positions();
    let mut rngs = cfg.player_rngs();
    let (a, b) = rngs.split_at_mut(1);
    simulate_two_player(cfg, [start[0], start[1]], [&mut a[0], &mut b[0]])
}

/// Two-player loop with explicit start positions and per-player streams.
///
/// Player `i` draws the shadowing of its incoming link and its own policy
/// decisions from `rngs[i]`, so swapping both positions and streams swaps
/// the trajectories.
pub fn simulate_two_player<R: Rng + ?Sized>(
    cfg: &TrialConfig,
    start: [Position; 2],
    rngs: [&mut R; 2],
) -> Result<TrialResult> {
    let params = &cfg.channel;
    let delta = params.delta;

    let mut links = [LinkState::init(params, rngs[0]), LinkState::init(params, rngs[1])];
    let mut policies: [Policy; 2] = [cfg.policy_for(0).build()?, cfg.policy_for(1).build()?];
    let mut pos = [LatticePos::new(start[0]), LatticePos::new(start[1])];
    let mut trace = cfg.record_trace.then(Vec::new);

    let mut turns_played = 0;
    let mut met = false;
    for turn in 1..=cfg.max_turns {
        let here = [pos[0].at(delta), pos[1].at(delta)];
        let d = here[0].distance(&here[1]);
        if d <= cfg.meet_radius {
            met = true;
            break;
        }
        let ds = cfg.sampling_distance(d);
        let mut obs = [(0.0, None); 2];
        for i in 0..2 {
            links[i].advance(params, &mut *rngs[i]);
            obs[i] = links[i].observe(ds, params)?;
        }
        let mut arms = [Arm::Up; 2];
        for i in 0..2 {
            arms[i] = policies[i].step(turn, obs[i].1, &mut *rngs[i])?;
        }
        if let Some(t) = trace.as_mut() {
            for i in 0..2 {
                t.push(TraceRecord {
                    turn,
                    player: i,
                    x: here[i].x,
                    y: here[i].y,
                    arm: Some(arms[i]),
                    rss: Some(obs[i].0),
                    reward: obs[i].1,
                });
            }
        }
        for i in 0..2 {
            pos[i].step(arms[i]);
        }
        turns_played = turn;
    }
    if !met {
        met = pos[0].at(delta).distance(&pos[1].at(delta)) <= cfg.meet_radius;
    }

    let group_steps = 2 * turns_played;
    Ok(TrialResult {
        met,
        turns: turns_played,
        group_steps,
        traversed_distance: group_steps as f64 * delta,
        start_positions: start.to_vec(),
        final_positions: vec![pos[0].at(delta), pos[1].at(delta)],
        final_leaders: if met { vec![0, 0] } else { vec![0, 1] },
        trace,
    })
}

/// Candidate with the largest averaged RSS; ties go to the lowest id.
pub fn select_target(avg_rss: &BTreeMap<usize, f64>) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (&id, &v) in avg_rss {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((id, v)),
        }
    }
    best.map(|(id, _)| id).ok_or_else(|| Error::Contract("select_target needs at least one candidate".into()))
}

/// Excess traversal `(T 2 delta - (x + y)) / (x + y)`.
pub fn metric_m(mean_turns: f64, delta: f64, x: f64, y: f64) -> Result<f64> {
    let l1 = x + y;
    if !(l1 > 0.0) || !l1.is_finite() {
        return Err(Error::Domain(format!("metric M needs x + y > 0, got {l1}")));
    }
    Ok((mean_turns * 2.0 * delta - l1) / l1)
}
