use rand::Rng;

use super::{cycle_step, Arm, Cycle, CycleRule};
use crate::Result;

/// Weights are divided by their sum once the sum exceeds this value.
pub const WEIGHT_RESCALE_THRESHOLD: f64 = 1e300;

/// R-Exp3: Exp3 weights with coupled reverse arms. The axis is sampled with
/// preference for the pair whose probabilities differ most, then the arm
/// within the pair proportionally to its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct RExp3State {
    pub weights: [f64; 4],
    /// Mixing and learning parameter in (0, 1).
    pub a: f64,
    pub cycle: Cycle,
}

impl RExp3State {
    pub fn new(a: f64) -> Self {
        Self { weights: [0.25; 4], a, cycle: Cycle::default() }
    }

    /// `p_i = (1 - a) w_i / sum(w) + a / 4`, indexed by arm slot.
    pub fn probabilities(&self) -> [f64; 4] {
        let sum: f64 = self.weights.iter().sum();
        self.weights.map(|w| (1.0 - self.a) * w / sum + self.a / 4.0)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, turn: u64, reward: Option<f64>, rng: &mut R) -> Result<Arm> {
        cycle_step(self, turn, reward, rng)
    }

    fn rescale_if_needed(&mut self) {
        let sum: f64 = self.weights.iter().sum();
        if sum > WEIGHT_RESCALE_THRESHOLD || !sum.is_finite() {
            for w in &mut self.weights {
                *w /= sum;
            }
        }
    }
}

/// Axis-selection weights `(h_1, h_2)` for the y pair (arms 1, 2) and the
/// x pair (arms 3, 4).
pub fn axis_weights(p: &[f64; 4]) -> (f64, f64) {
    let dy = (p[0] - p[1]).abs();
    let dx = (p[2] - p[3]).abs();
    let denom = dy + dx + 1.0;
    ((dy + 0.5) / denom, (dx + 0.5) / denom)
}

/// Arm number from the sampled axis `l1` and in-pair choice `l2`, both 1-based.
pub fn exp3_arm_index(l1: usize, l2: usize) -> usize {
    l1 * l1 - l1 + l2
}

impl CycleRule for RExp3State {
    fn cycle(&mut self) -> &mut Cycle {
        &mut self.cycle
    }

    fn explore<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Arm {
        let p = self.probabilities();
        let (h1, _) = axis_weights(&p);
        let l1 = if rng.random::<f64>() < h1 { 1 } else { 2 };
        let (first, second) = if l1 == 1 { (p[0], p[1]) } else { (p[2], p[3]) };
        let k1 = first / (first + second);
        let l2 = if rng.random::<f64>() < k1 { 1 } else { 2 };
        Arm::from_index(exp3_arm_index(l1, l2)).expect("index in 1..=4")
    }

    fn learn(&mut self, arm: Arm, reward: f64) {
        // Weights have not changed since `arm` was pulled, so these are the
        // probabilities in force at that pull.
        let p = self.probabilities();
        let transformed = if reward > 0.0 { 1.0 / p[arm.slot()] } else { 0.0 };
        self.weights[arm.slot()] *= (self.a * transformed / 4.0).exp();
        self.rescale_if_needed();
    }
}
