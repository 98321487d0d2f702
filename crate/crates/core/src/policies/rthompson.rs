use rand::Rng;
use rand_distr::{Beta, Distribution};

use super::{cycle_step, Arm, Cycle, CycleRule};
use crate::Result;

/// R-Thompson: Beta posteriors over "positive reward" per arm. The axis whose
/// two samples disagree most is explored, in the direction of the larger
/// sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RThompsonState {
    /// Success tallies per arm slot.
    pub successes: [f64; 4],
    /// Failure tallies per arm slot.
    pub failures: [f64; 4],
    /// Increment applied to one tally per observed reward.
    pub epsilon: f64,
    pub cycle: Cycle,
}

impl RThompsonState {
    pub fn new(epsilon: f64) -> Self {
        Self { successes: [0.0; 4], failures: [0.0; 4], epsilon, cycle: Cycle::default() }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, turn: u64, reward: Option<f64>, rng: &mut R) -> Result<Arm> {
        cycle_step(self, turn, reward, rng)
    }
}

/// Arm chosen from the posterior samples `theta` (indexed by arm slot).
/// Ties go to the lower index at both stages.
pub fn thompson_choice(theta: &[f64; 4]) -> Arm {
    let y_gap = (theta[0] - theta[1]).abs();
    let x_gap = (theta[2] - theta[3]).abs();
    if y_gap >= x_gap {
        if theta[0] >= theta[1] {
            Arm::Up
        } else {
            Arm::Down
        }
    } else if theta[2] >= theta[3] {
        Arm::Right
    } else {
        Arm::Left
    }
}

impl CycleRule for RThompsonState {
    fn cycle(&mut self) -> &mut Cycle {
        &mut self.cycle
    }

    fn explore<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Arm {
        let mut theta = [0.0; 4];
        for (i, t) in theta.iter_mut().enumerate() {
            let beta = Beta::new(self.successes[i] + 1.0, self.failures[i] + 1.0)
                .expect("tallies are finite and non-negative");
            *t = beta.sample(rng);
        }
        thompson_choice(&theta)
    }

    fn learn(&mut self, arm: Arm, reward: f64) {
        if reward > 0.0 {
            self.successes[arm.slot()] += self.epsilon;
        } else {
            self.failures[arm.slot()] += self.epsilon;
        }
    }
}
