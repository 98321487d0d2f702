use std::collections::BTreeMap;

use serde::Serialize;

use crate::engine::TrialResult;
use crate::{Error, Result};

/// The part of a trial result that enters the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSummary {
    pub met: bool,
    pub turns: u64,
    pub distance: f64,
    /// Excess-traversal metric, for two-player trials with `x + y > 0`.
    pub m: Option<f64>,
}

impl TrialSummary {
    pub fn from_result(r: &TrialResult, with_m: bool) -> Self {
        let m = if with_m && r.start_positions.len() == 2 {
            let dx = (r.start_positions[1].x - r.start_positions[0].x).abs();
            let dy = (r.start_positions[1].y - r.start_positions[0].y).abs();
            (dx + dy > 0.0).then(|| (r.traversed_distance - (dx + dy)) / (dx + dy))
        } else {
            None
        };
        Self { met: r.met, turns: r.turns, distance: r.traversed_distance, m }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateStats {
    pub trials: u64,
    pub mean_turns: f64,
    /// Standard error of the mean turns (sample standard deviation over
    /// `sqrt(n)`); zero for a single trial.
    pub std_err: f64,
    pub meeting_rate: f64,
    pub mean_m: Option<f64>,
    pub mean_distance: f64,
}

/// Collects trial summaries keyed by trial index. Merging is exact and
/// order-independent: statistics are computed from the summaries in index
/// order when the aggregator is finished.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Aggregator {
    trials: BTreeMap<u64, TrialSummary>,
}

impl Aggregator {
    pub fn add(&mut self, trial: u64, s: TrialSummary) {
        self.trials.insert(trial, s);
    }

    pub fn merge(&mut self, other: Aggregator) {
        self.trials.extend(other.trials);
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn finish(&self) -> Result<AggregateStats> {
        let n = self.trials.len() as u128;
        if n == 0 {
            return Err(Error::Contract("no trials to aggregate".into()));
        }
        let (mut sum, mut sum_sq, mut met) = (0u128, 0u128, 0u128);
        let mut distance = 0.0;
        let (mut m_sum, mut m_count) = (0.0, 0u64);
        for s in self.trials.values() {
            let t = s.turns as u128;
            sum += t;
            sum_sq += t * t;
            met += s.met as u128;
            distance += s.distance;
            if let Some(m) = s.m {
                m_sum += m;
                m_count += 1;
            }
        }
        let nf = n as f64;
        let std_err = if n > 1 {
            // integer numerator keeps the variance exact until the final division
            let num = n * sum_sq - sum * sum;
            (num as f64 / (nf * (nf - 1.0)) / nf).sqrt()
        } else {
            0.0
        };
        Ok(AggregateStats {
            trials: n as u64,
            mean_turns: sum as f64 / nf,
            std_err,
            meeting_rate: met as f64 / nf,
            mean_m: (m_count > 0).then(|| m_sum / m_count as f64),
            mean_distance: distance / nf,
        })
    }
}
