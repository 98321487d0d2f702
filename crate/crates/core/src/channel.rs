//! Radio channel between node pairs.
//!
//! Mean received power follows the log-distance model
//! `P(d) = p_i - 10 n_p log(d / d_0)`. On top of it every directed link
//! carries a log-normal shadowing term that evolves as a first-order
//! auto-regressive process:
//!
//! ```text
//! s' = rho * s + sqrt(1 - rho^2) * sigma * g,    g ~ N(0, 1),  rho = exp(-2 delta / x_c)
//! ```
//!
//! so the stationary shadowing is `N(0, sigma^2)`, the lag-k auto-covariance is
//! `sigma^2 rho^k`, and the adjacent-turn difference has variance
//! `2 sigma^2 (1 - rho)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Logarithm used by the path-loss law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Base10,
}

impl LogBase {
    #[inline]
    pub fn log(self, v: f64) -> f64 {
        match self {
            LogBase::Natural => v.ln(),
            LogBase::Base10 => v.log10(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::Natural => "natural",
            LogBase::Base10 => "base10",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "natural" | "ln" | "e" => Ok(LogBase::Natural),
            "base10" | "log10" | "10" => Ok(LogBase::Base10),
            other => Err(format!("unknown log base `{other}` (expected natural|base10)")),
        }
    }
}

/// Radio-environment constants shared by every link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Received power at the reference distance, dB.
    pub p_i: f64,
    /// Reference distance, meters.
    pub d_0: f64,
    /// Path-loss exponent.
    pub n_p: f64,
    /// Shadowing standard deviation, dB.
    pub sigma: f64,
    /// Shadowing decorrelation distance, meters.
    pub x_c: f64,
    /// Per-turn step length of a single player, meters.
    pub delta: f64,
    pub log_base: LogBase,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self { p_i: 0.0, d_0: 1.0, n_p: 4.0, sigma: 4.0, x_c: 75.0, delta: 0.1, log_base: LogBase::Natural }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("d_0", self.d_0)?;
        positive("n_p", self.n_p)?;
        positive("x_c", self.x_c)?;
        positive("delta", self.delta)?;
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::invalid("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        if !self.p_i.is_finite() {
            return Err(Error::invalid("p_i", "must be finite"));
        }
        let rho = self.rho();
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid(
                "delta",
                format!("per-turn correlation exp(-2 delta / x_c) = {rho} is not in (0, 1)"),
            ));
        }
        Ok(())
    }

    /// Per-turn shadowing correlation. Both players move `delta`, which is
    /// treated as one player moving `2 delta`.
    #[inline]
    pub fn rho(&self) -> f64 {
        (-2.0 * self.delta / self.x_c).exp()
    }

    /// `sigma^2 (1 - exp(-2 delta / x_c))`, the per-link shadowing
    /// innovation scale that drives every closed form in [`crate::analysis`].
    #[inline]
    pub fn sigma_tilde_sq(&self) -> f64 {
        self.sigma * self.sigma * -(-2.0 * self.delta / self.x_c).exp_m1()
    }

    /// Mean received power at distance `d`.
    pub fn path_loss_mean(&self, d: f64) -> Result<f64> {
        path_loss_mean(d, self)
    }
}

/// Log-distance mean received power `p_i - 10 n_p log(d / d_0)`, dB.
pub fn path_loss_mean(d: f64, params: &ChannelParams) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("path loss needs distance > 0, got {d}")));
    }
    Ok(params.p_i - 10.0 * params.n_p * params.log_base.log(d / params.d_0))
}

/// Per-turn reward: the RSS change since the previous turn. `None` on the
/// first turn, when there is no previous sample.
#[inline]
pub fn reward(rss_now: f64, rss_prev: Option<f64>) -> Option<f64> {
    rss_prev.map(|prev| rss_now - prev)
}

/// State of one directed transmitter-to-receiver link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkState {
    /// Current shadowing value, dB.
    pub shadow: f64,
    /// Last sampled RSS, dB.
    pub last_rss: Option<f64>,
}

impl LinkState {
    /// Draws a stationary shadowing value `N(0, sigma^2)`.
    pub fn init<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> Self {
        let g: f64 = rng.sample(StandardNormal);
        Self { shadow: params.sigma * g, last_rss: None }
    }

    /// One AR(1) step of the shadowing process. Always consumes exactly one
    /// normal draw, so the RNG stream stays aligned regardless of `sigma`.
    pub fn advance<R: Rng + ?Sized>(&mut self, params: &ChannelParams, rng: &mut R) {
        let g: f64 = rng.sample(StandardNormal);
        let rho = params.rho();
        let innovation = (1.0 - rho * rho).max(0.0).sqrt() * params.sigma;
        self.shadow = rho * self.shadow + innovation * g;
    }

    /// Samples the RSS at distance `d` with the current shadowing and records
    /// it as `last_rss`.
    pub fn sample_rss(&mut self, d: f64, params: &ChannelParams) -> Result<f64> {
        let rss = path_loss_mean(d, params)? + self.shadow;
        self.last_rss = Some(rss);
        Ok(rss)
    }

    /// Samples the RSS and returns it together with the reward against the
    /// previous sample.
    pub fn observe(&mut self, d: f64, params: &ChannelParams) -> Result<(f64, Option<f64>)> {
        let prev = self.last_rss;
        let rss = self.sample_rss(d, params)?;
        Ok((rss, reward(rss, prev)))
    }
}
