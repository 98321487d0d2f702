//! Movement policies.
//!
//! Every policy works in two-turn cycles. Turn 1 pulls a uniformly random
//! arm. On an even turn the policy picks an exploration arm; on the following
//! odd turn it commits: it pulls the same arm again if the exploration reward
//! was positive and the reverse arm otherwise (the sign rule). Policies differ
//! only in how they pick the exploration arm and what they learn from rewards.
//!
//! Rewards arrive one turn late: `step(t, r)` receives the reward of the arm
//! pulled at turn `t - 1`.

mod greedy;
mod rexp3;
mod roptimal;
mod rthompson;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use greedy::GreedyState;
pub use rexp3::{axis_weights, exp3_arm_index, RExp3State, WEIGHT_RESCALE_THRESHOLD};
pub use roptimal::{roptimal_choice, ROptimalState};
pub use rthompson::{thompson_choice, RThompsonState};

/// Default R-Exp3 mixing parameter.
pub const DEFAULT_A: f64 = 1e-3;
/// Default R-Thompson learning rate.
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

/// One of the four movement directions. Discriminants follow the 1-based
/// arm numbering of the algorithms: up, down, right, left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Arm {
    /// +y
    Up = 1,
    /// -y
    Down = 2,
    /// +x
    Right = 3,
    /// -x
    Left = 4,
}

impl Arm {
    pub const ALL: [Arm; 4] = [Arm::Up, Arm::Down, Arm::Right, Arm::Left];
    pub const PLUS_X: Arm = Arm::Right;
    pub const MINUS_X: Arm = Arm::Left;
    pub const PLUS_Y: Arm = Arm::Up;
    pub const MINUS_Y: Arm = Arm::Down;

    /// 1-based arm number.
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub(crate) fn slot(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(i: usize) -> Option<Arm> {
        match i {
            1 => Some(Arm::Up),
            2 => Some(Arm::Down),
            3 => Some(Arm::Right),
            4 => Some(Arm::Left),
            _ => None,
        }
    }

    #[inline]
    pub fn reverse(self) -> Arm {
        match self {
            Arm::Up => Arm::Down,
            Arm::Down => Arm::Up,
            Arm::Right => Arm::Left,
            Arm::Left => Arm::Right,
        }
    }

    #[inline]
    pub fn axis(self) -> Axis {
        match self {
            Arm::Up | Arm::Down => Axis::Y,
            Arm::Right | Arm::Left => Axis::X,
        }
    }

    /// Unit displacement `(dx, dy)`.
    #[inline]
    pub fn direction(self) -> (f64, f64) {
        match self {
            Arm::Up => (0.0, 1.0),
            Arm::Down => (0.0, -1.0),
            Arm::Right => (1.0, 0.0),
            Arm::Left => (-1.0, 0.0),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Arm::Up => "+y",
            Arm::Down => "-y",
            Arm::Right => "+x",
            Arm::Left => "-x",
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Arm {
        Arm::ALL[rng.random_range(0..4)]
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "+x" | "right" => Ok(Arm::Right),
            "-x" | "left" => Ok(Arm::Left),
            "+y" | "up" => Ok(Arm::Up),
            "-y" | "down" => Ok(Arm::Down),
            other => Err(format!("unknown arm `{other}`")),
        }
    }
}

/// The sign rule: keep a positively rewarded arm, reverse otherwise.
#[inline]
pub fn commit_arm(explored: Arm, reward: f64) -> Arm {
    if reward > 0.0 {
        explored
    } else {
        explored.reverse()
    }
}

/// Which half of the two-turn cycle the last pull belonged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Phase {
    /// No pull yet, or only the random turn-1 pull.
    #[default]
    Start,
    Explore,
    Commit,
}

/// Cycle bookkeeping shared by all policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cycle {
    /// Arm pulled on the previous turn.
    pub last_arm: Option<Arm>,
    /// Arm chosen by the sign rule for the current commit turn.
    pub committed_arm: Option<Arm>,
    pub phase: Phase,
}

/// Exploration and learning rules that distinguish the policies.
trait CycleRule {
    fn cycle(&mut self) -> &mut Cycle;

    /// Picks the exploration arm on an even turn.
    fn explore<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Arm;

    /// Absorbs the reward observed for `arm`.
    fn learn(&mut self, arm: Arm, reward: f64);
}

fn cycle_step<P: CycleRule, R: Rng + ?Sized>(
    policy: &mut P,
    turn: u64,
    reward: Option<f64>,
    rng: &mut R,
) -> Result<Arm> {
    if turn == 0 {
        return Err(Error::Contract("turns are numbered from 1".into()));
    }
    let prev = policy.cycle().last_arm;
    if turn >= 2 {
        let Some(r) = reward else {
            return Err(Error::Contract(format!("reward missing at turn {turn}")));
        };
        let Some(prev_arm) = prev else {
            return Err(Error::Contract(format!("turn {turn} stepped before any arm was pulled")));
        };
        policy.learn(prev_arm, r);
    }

    let arm = if turn == 1 {
        let arm = Arm::random(rng);
        *policy.cycle() = Cycle { last_arm: Some(arm), committed_arm: None, phase: Phase::Start };
        return Ok(arm);
    } else if turn.is_multiple_of(2) {
        let arm = policy.explore(rng);
        let c = policy.cycle();
        c.phase = Phase::Explore;
        c.committed_arm = None;
        arm
    } else {
        // Safe: both were checked above for turn >= 2.
        let arm = commit_arm(prev.unwrap(), reward.unwrap());
        let c = policy.cycle();
        c.phase = Phase::Commit;
        c.committed_arm = Some(arm);
        arm
    };
    policy.cycle().last_arm = Some(arm);
    Ok(arm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Greedy,
    RExp3,
    RThompson,
    ROptimal,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::Greedy, PolicyKind::RExp3, PolicyKind::RThompson, PolicyKind::ROptimal];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Greedy => "greedy",
            PolicyKind::RExp3 => "rexp3",
            PolicyKind::RThompson => "rthompson",
            PolicyKind::ROptimal => "roptimal",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "greedy" => Ok(PolicyKind::Greedy),
            "rexp3" => Ok(PolicyKind::RExp3),
            "rthompson" => Ok(PolicyKind::RThompson),
            "roptimal" => Ok(PolicyKind::ROptimal),
            other => Err(format!("unknown policy `{other}` (expected greedy|rexp3|rthompson|roptimal)")),
        }
    }
}

/// A policy together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolicySpec {
    Greedy,
    RExp3 { a: f64 },
    RThompson { epsilon: f64 },
    ROptimal,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, a: f64, epsilon: f64) -> Self {
        match kind {
            PolicyKind::Greedy => PolicySpec::Greedy,
            PolicyKind::RExp3 => PolicySpec::RExp3 { a },
            PolicyKind::RThompson => PolicySpec::RThompson { epsilon },
            PolicyKind::ROptimal => PolicySpec::ROptimal,
        }
    }

    pub fn with_defaults(kind: PolicyKind) -> Self {
        Self::new(kind, DEFAULT_A, DEFAULT_EPSILON)
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::Greedy => PolicyKind::Greedy,
            PolicySpec::RExp3 { .. } => PolicyKind::RExp3,
            PolicySpec::RThompson { .. } => PolicyKind::RThompson,
            PolicySpec::ROptimal => PolicyKind::ROptimal,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicySpec::RExp3 { a } if !(a > 0.0 && a < 1.0) => {
                Err(Error::invalid("a", format!("must lie in (0, 1), got {a}")))
            }
            PolicySpec::RThompson { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => {
                Err(Error::invalid("epsilon", format!("must be > 0, got {epsilon}")))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Policy> {
        self.validate()?;
        Ok(match *self {
            PolicySpec::Greedy => Policy::Greedy(GreedyState::new()),
            PolicySpec::RExp3 { a } => Policy::RExp3(RExp3State::new(a)),
            PolicySpec::RThompson { epsilon } => Policy::RThompson(RThompsonState::new(epsilon)),
            PolicySpec::ROptimal => Policy::ROptimal(ROptimalState::new()),
        })
    }
}

/// Per-player policy memory.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Greedy(GreedyState),
    RExp3(RExp3State),
    RThompson(RThompsonState),
    ROptimal(ROptimalState),
}

impl Policy {
    /// Chooses the arm for `turn`, given the reward of the arm pulled at
    /// `turn - 1` (absent on turn 1).
    pub fn step<R: Rng + ?Sized>(&mut self, turn: u64, reward: Option<f64>, rng: &mut R) -> Result<Arm> {
        match self {
            Policy::Greedy(s) => s.step(turn, reward, rng),
            Policy::RExp3(s) => s.step(turn, reward, rng),
            Policy::RThompson(s) => s.step(turn, reward, rng),
            Policy::ROptimal(s) => s.step(turn, reward, rng),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        match self {
            Policy::Greedy(_) => PolicyKind::Greedy,
            Policy::RExp3(_) => PolicyKind::RExp3,
            Policy::RThompson(_) => PolicyKind::RThompson,
            Policy::ROptimal(_) => PolicyKind::ROptimal,
        }
    }

    pub fn cycle(&self) -> &Cycle {
        match self {
            Policy::Greedy(s) => &s.cycle,
            Policy::RExp3(s) => &s.cycle,
            Policy::RThompson(s) => &s.cycle,
            Policy::ROptimal(s) => &s.cycle,
        }
    }
}
