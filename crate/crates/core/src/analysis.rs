//! Closed-form reward distributions, positive-arm probabilities and
//! meeting-time bounds.
//!
//! Formulas are kept in the form they were derived in, including the
//! first-order Taylor forms. Where a derivation fixes a constant that a
//! direct simulation of [`crate::channel`] does not reproduce, a
//! simulation-consistent companion is provided next to it
//! ([`reward_mixture_moments`], [`prob_positive_taylor_corrected`]).
//!
//! Conventions: `Scenario { x, y }` is the position of the opponent relative
//! to the observing player, normally with `x, y >= 0`, so the `+x` and `+y`
//! arms are the ones that close the distance.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::policies::{Arm, Axis};
use crate::{Error, Result};

/// Standard Gaussian tail probability `Q(x) = P(Z > x)`.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Relative geometry of two players plus the channel they share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub x: f64,
    pub y: f64,
    pub channel: ChannelParams,
}

impl Scenario {
    /// Builds a scenario. Logs a warning when `d < 20 delta`, where the
    /// small-step approximations degrade.
    pub fn new(x: f64, y: f64, channel: ChannelParams) -> Result<Self> {
        channel.validate()?;
        let s = Self { x, y, channel };
        if !(s.d_sq() > 0.0) || !s.d_sq().is_finite() {
            return Err(Error::Domain(format!("scenario needs a non-zero finite separation, got ({x}, {y})")));
        }
        if !s.in_small_step_regime() {
            log::warn!(
                "separation {:.4} m is below 20 steps of {} m; closed forms are approximate",
                s.d(),
                channel.delta
            );
        }
        Ok(s)
    }

    #[inline]
    pub fn d_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    #[inline]
    pub fn d(&self) -> f64 {
        self.d_sq().sqrt()
    }

    /// `d >= 20 delta`.
    pub fn in_small_step_regime(&self) -> bool {
        self.d() >= 20.0 * self.channel.delta
    }

    #[inline]
    fn coord(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    #[inline]
    fn log(&self, v: f64) -> f64 {
        self.channel.log_base.log(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianSpec {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Two-turn outcome probabilities of one Greedy cycle along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleProbs {
    /// Drift parameter.
    pub a: f64,
    /// Net displacement zero.
    pub p_stay: f64,
    /// Relative coordinate shrinks by `2 delta`.
    pub p_toward: f64,
    /// Relative coordinate grows by `2 delta`.
    pub p_away: f64,
}

/// Mean RSS and shadowing variance at the scenario's separation.
pub fn rss_distribution(s: &Scenario) -> Result<GaussianSpec> {
    let mean = s.channel.path_loss_mean(s.d())?;
    Ok(GaussianSpec { mean, variance: s.channel.sigma * s.channel.sigma })
}

/// The nine approximate reward distributions produced by a simultaneous
/// move of both players. Each case is a change of the relative position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RewardCase {
    /// `(x + delta, y + delta)`
    D1,
    /// `(x - delta, y + delta)`
    D2,
    /// `(x + delta, y - delta)`
    D3,
    /// `(x - delta, y - delta)`
    D4,
    /// `(x + 2 delta, y)`
    D5,
    /// `(x - 2 delta, y)`
    D6,
    /// `(x, y + 2 delta)`
    D7,
    /// `(x, y - 2 delta)`
    D8,
    /// `(x, y)`
    D9,
}

impl RewardCase {
    /// First-order growth `c` of the squared separation, `|r'|^2 ~ |r|^2 + c`.
    pub fn offset(self, x: f64, y: f64, delta: f64) -> f64 {
        let (cx, cy) = match self {
            RewardCase::D1 => (2.0, 2.0),
            RewardCase::D2 => (-2.0, 2.0),
            RewardCase::D3 => (2.0, -2.0),
            RewardCase::D4 => (-2.0, -2.0),
            RewardCase::D5 => (4.0, 0.0),
            RewardCase::D6 => (-4.0, 0.0),
            RewardCase::D7 => (0.0, 4.0),
            RewardCase::D8 => (0.0, -4.0),
            RewardCase::D9 => (0.0, 0.0),
        };
        (cx * x + cy * y) * delta
    }
}

/// Case lookup by (first player's move, second player's move).
pub fn move_pair_case(first: Arm, second: Arm) -> RewardCase {
    use RewardCase::*;
    // rows and columns ordered +x, -x, +y, -y
    const TABLE: [[RewardCase; 4]; 4] = [[D9, D6, D2, D4], [D5, D9, D1, D3], [D3, D4, D9, D8], [D1, D2, D7, D9]];
    let idx = |a: Arm| match a {
        Arm::Right => 0,
        Arm::Left => 1,
        Arm::Up => 2,
        Arm::Down => 3,
    };
    TABLE[idx(first)][idx(second)]
}

/// Reward distribution seen by the first player when the players move
/// `first` and `second`: `N(-5 n_p log(1 + c / d^2), 2 sigma~^2)`.
pub fn move_pair_distribution(first: Arm, second: Arm, s: &Scenario) -> GaussianSpec {
    let c = move_pair_case(first, second).offset(s.x, s.y, s.channel.delta);
    let mean = if c == 0.0 { 0.0 } else { -5.0 * s.channel.n_p * s.log(1.0 + c / s.d_sq()) };
    GaussianSpec { mean, variance: 2.0 * s.channel.sigma_tilde_sq() }
}

/// `(sign, coordinate)` of an arm: `+1` for the arm that closes the
/// coordinate when it is positive.
fn arm_orientation(arm: Arm, s: &Scenario) -> (f64, f64) {
    let sign = match arm {
        Arm::Right | Arm::Up => 1.0,
        Arm::Left | Arm::Down => -1.0,
    };
    (sign, s.coord(arm.axis()))
}

/// Reward of `arm` against a uniformly random opponent, in the closed form
/// `N(-2.5 n_p log(1 -/+ 4 c delta / d^2), 8 sigma~^2)`.
pub fn reward_distribution(arm: Arm, s: &Scenario) -> GaussianSpec {
    let (sign, c) = arm_orientation(arm, s);
    let ratio = 4.0 * c * s.channel.delta / s.d_sq();
    GaussianSpec { mean: -2.5 * s.channel.n_p * s.log(1.0 - sign * ratio), variance: 8.0 * s.channel.sigma_tilde_sq() }
}

/// Exact first two moments of the reward of `arm` against a uniformly random
/// opponent under the AR(1) channel: an equal mixture of four Gaussians with
/// exact means `-5 n_p log(|r'|^2 / |r|^2)` and common variance
/// `2 sigma~^2`.
pub fn reward_mixture_moments(arm: Arm, s: &Scenario) -> GaussianSpec {
    let delta = s.channel.delta;
    let (ax, ay) = arm.direction();
    let means: Vec<f64> = Arm::ALL
        .iter()
        .map(|opp| {
            let (bx, by) = opp.direction();
            let nx = s.x + (bx - ax) * delta;
            let ny = s.y + (by - ay) * delta;
            -5.0 * s.channel.n_p * s.log((nx * nx + ny * ny) / s.d_sq())
        })
        .collect();
    let mean = means.iter().sum::<f64>() / 4.0;
    let spread = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / 4.0;
    GaussianSpec { mean, variance: 2.0 * s.channel.sigma_tilde_sq() + spread }
}

fn check_window(n_avg: u64) -> Result<f64> {
    if n_avg == 0 {
        return Err(Error::invalid("n_avg", "averaging window must be >= 1"));
    }
    Ok(n_avg as f64)
}

/// Q argument for "the N-averaged reward of `arm` is positive":
/// `-mu sqrt(N) / (2 sqrt(2) sigma~)`.
fn positive_arg(arm: Arm, s: &Scenario, n: f64) -> f64 {
    let mu = reward_distribution(arm, s).mean;
    let sigma_tilde = s.channel.sigma_tilde_sq().sqrt();
    if mu == 0.0 {
        return 0.0;
    }
    -mu * n.sqrt() / (2.0 * SQRT_2 * sigma_tilde)
}

/// Probability that the average of `n_avg` rewards of `arm` is positive.
pub fn prob_positive(arm: Arm, s: &Scenario, n_avg: u64) -> Result<f64> {
    let n = check_window(n_avg)?;
    Ok(q_function(positive_arg(arm, s, n)))
}

/// First-order Taylor form of [`prob_positive`] with the `4 sqrt(2 pi)`
/// denominator of the bound derivations.
pub fn prob_positive_taylor(arm: Arm, s: &Scenario, n_avg: u64) -> Result<f64> {
    let n = check_window(n_avg)?;
    let mu = reward_distribution(arm, s).mean;
    let sigma_tilde = s.channel.sigma_tilde_sq().sqrt();
    if mu == 0.0 {
        return Ok(0.5);
    }
    Ok(0.5 + 2.0 * mu * n.sqrt() / (4.0 * (2.0 * PI).sqrt() * sigma_tilde))
}

/// First-order Taylor expansion of the exact Q form, i.e. with denominator
/// `4 sqrt(2) sqrt(2 pi)`. Differs from [`prob_positive_taylor`] by a factor
/// `sqrt(2)` in the deviation from 1/2.
pub fn prob_positive_taylor_corrected(arm: Arm, s: &Scenario, n_avg: u64) -> Result<f64> {
    let n = check_window(n_avg)?;
    Ok(0.5 - positive_arg(arm, s, n) / (2.0 * PI).sqrt())
}

/// Drift parameter `a = 5 n_p c delta / (sqrt(2 pi) d^2 sigma~)` along `axis`,
/// `c` being the relative coordinate on that axis.
pub fn drift_parameter(s: &Scenario, axis: Axis) -> f64 {
    let sigma_tilde = s.channel.sigma_tilde_sq().sqrt();
    let c = s.coord(axis);
    if c == 0.0 {
        return 0.0;
    }
    5.0 * s.channel.n_p * c * s.channel.delta / ((2.0 * PI).sqrt() * s.d_sq() * sigma_tilde)
}

/// Outcome probabilities of a Greedy cycle along `axis`.
///
/// Fails when `|a| >= 1/2`, outside the small-drift regime where the
/// probabilities are valid.
pub fn greedy_cycle_probs(s: &Scenario, axis: Axis) -> Result<CycleProbs> {
    let a = drift_parameter(s, axis);
    if !a.is_finite() || a.abs() >= 0.5 {
        return Err(Error::Domain(format!("drift a = {a} is outside the small-drift regime |a| < 1/2")));
    }
    Ok(CycleProbs { a, p_stay: 0.5, p_toward: 0.25 + a / 2.0, p_away: 0.25 - a / 2.0 })
}

/// `sqrt(2 pi sigma^2 (1 - exp(-2 delta / x_c)))`.
fn bound_noise_scale(c: &ChannelParams) -> f64 {
    (2.0 * PI * c.sigma_tilde_sq()).sqrt()
}

/// Upper bound on the expected Greedy meeting time, in turns.
pub fn greedy_meeting_bound(s: &Scenario) -> f64 {
    let c = &s.channel;
    s.d_sq() * bound_noise_scale(c) / (5.0 * c.n_p * c.delta * c.delta)
}

/// Expected total distance walked by both players under the Greedy bound,
/// `E[T] 2 delta`.
pub fn greedy_expected_traversal(s: &Scenario) -> f64 {
    greedy_meeting_bound(s) * 2.0 * s.channel.delta
}

/// Default confidence constant of the R-Optimal bound.
pub const DEFAULT_Z: f64 = 10.0;

/// Upper bound on the expected R-Optimal meeting time, in turns.
pub fn roptimal_meeting_bound(s: &Scenario, z: f64) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid("z", format!("must be > 0, got {z}")));
    }
    let c = &s.channel;
    let d = s.d();
    Ok(2.0 * z * d * bound_noise_scale(c) / (5.0 * c.n_p * c.delta) + d / c.delta)
}

/// Random-walk quantities behind the R-Optimal bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub a: f64,
    /// Probability of a step away from the positive-arm states.
    pub p: f64,
    /// Probability of a step toward the positive-arm states.
    pub q: f64,
    /// Expected steps to cross `z` states, `z / (q - p)`.
    pub t_gambler: f64,
    /// Expected cycles to move one state, self-loops included, `1 / (2a)`.
    pub t_estimated: f64,
}

pub fn roptimal_drift(s: &Scenario, axis: Axis, z: f64) -> Result<DriftRecord> {
    let a = drift_parameter(s, axis);
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NoDrift);
    }
    let norm = 0.5 + 2.0 * a * a;
    Ok(DriftRecord {
        a,
        p: (0.5 - a).powi(2) / norm,
        q: (0.5 + a).powi(2) / norm,
        t_gambler: z * (4.0 * a * a + 1.0) / (4.0 * a),
        t_estimated: 1.0 / (2.0 * a),
    })
}

fn check_triangle(d12: f64, d13: f64, d23: f64) -> Result<()> {
    for (name, v) in [("d12", d12), ("d13", d13), ("d23", d23)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be > 0, got {v}")));
        }
    }
    let slack = 1e-9 * (d12 + d13 + d23);
    if (d13 - d12).abs() > d23 + slack || d23 > d12 + d13 + slack {
        return Err(Error::Domain(format!("distances ({d12}, {d13}, {d23}) violate the triangle inequality")));
    }
    Ok(())
}

fn closest_q(log_ratio: f64, d23: f64, params: &ChannelParams, n: f64) -> f64 {
    if log_ratio == 0.0 {
        return 0.5;
    }
    let spread = SQRT_2 * params.sigma * (-(-d23 / params.x_c).exp_m1()).sqrt();
    q_function(-10.0 * n.sqrt() * params.n_p * log_ratio / spread)
}

/// Probability that the receiver's `n_avg`-averaged RSS from player 2 (at
/// `d12`) exceeds that from player 3 (at `d13`), with shadowing correlation
/// `exp(-d23 / x_c)` between the two links.
pub fn closest_player_prob(d12: f64, d13: f64, d23: f64, params: &ChannelParams, n_avg: u64) -> Result<f64> {
    let n = check_window(n_avg)?;
    check_triangle(d12, d13, d23)?;
    Ok(closest_q(params.log_base.log(d13 / d12), d23, params, n))
}

/// Bound form of [`closest_player_prob`] with `log(d13 / d12)` replaced by
/// `log(1 + d23 / d12)`. Never below the exact value.
pub fn closest_player_prob_bound(d12: f64, d13: f64, d23: f64, params: &ChannelParams, n_avg: u64) -> Result<f64> {
    let n = check_window(n_avg)?;
    check_triangle(d12, d13, d23)?;
    Ok(closest_q(params.log_base.log(1.0 + d23 / d12), d23, params, n))
}

/// Probability that candidate `i` is identified as the closest among all
/// candidates: the product of pairwise comparisons against every other
/// candidate.
///
/// `dists_from_receiver[k]` is the receiver-to-candidate distance and
/// `pairwise[j][k]` the candidate-to-candidate distance matrix.
pub fn prob_closest_of_m(
    dists_from_receiver: &[f64],
    pairwise: &[Vec<f64>],
    i: usize,
    params: &ChannelParams,
    n_avg: u64,
) -> Result<f64> {
    let m = dists_from_receiver.len();
    if i >= m {
        return Err(Error::Contract(format!("candidate {i} out of range 0..{m}")));
    }
    if pairwise.len() != m || pairwise.iter().any(|row| row.len() != m) {
        return Err(Error::Contract(format!("pairwise matrix must be {m}x{m}")));
    }
    for (j, row) in pairwise.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            if (v - pairwise[k][j]).abs() > 1e-9 * (1.0 + v.abs()) {
                return Err(Error::Contract("pairwise matrix is not symmetric".into()));
            }
        }
    }
    (0..m).filter(|&k| k != i).try_fold(1.0, |acc, k| {
        Ok(acc * closest_player_prob(dists_from_receiver[i], dists_from_receiver[k], pairwise[i][k], params, n_avg)?)
    })
}
