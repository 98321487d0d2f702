use rand::Rng;

use super::{cycle_step, Arm, Cycle, CycleRule};
use crate::Result;

/// R-Optimal: empirical positive-reward rates per arm. Each exploration
/// picks an axis uniformly and the arm of that axis with the higher rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ROptimalState {
    /// Positive-reward counts per arm slot.
    pub positives: [u64; 4],
    /// Play counts per arm slot, starting at 1.
    pub plays: [u64; 4],
    pub cycle: Cycle,
}

impl Default for ROptimalState {
    fn default() -> Self {
        Self { positives: [0; 4], plays: [1; 4], cycle: Cycle::default() }
    }
}

impl ROptimalState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Empirical rates `k_i = p_i / c_i`.
    pub fn rates(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.positives[i] as f64 / self.plays[i] as f64)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, turn: u64, reward: Option<f64>, rng: &mut R) -> Result<Arm> {
        cycle_step(self, turn, reward, rng)
    }
}

/// Arm picked from rates `k` and the uniform draw `alpha`: `alpha > 0.5`
/// selects the y pair (arms 1, 2), otherwise the x pair (arms 3, 4). Ties go
/// to the lower index.
pub fn roptimal_choice(k: &[f64; 4], alpha: f64) -> Arm {
    if alpha > 0.5 {
        if k[0] >= k[1] {
            Arm::Up
        } else {
            Arm::Down
        }
    } else if k[2] >= k[3] {
        Arm::Right
    } else {
        Arm::Left
    }
}

impl CycleRule for ROptimalState {
    fn cycle(&mut self) -> &mut Cycle {
        &mut self.cycle
    }

    fn explore<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Arm {
        let alpha: f64 = rng.random();
        roptimal_choice(&self.rates(), alpha)
    }

    fn learn(&mut self, arm: Arm, reward: f64) {
        if reward > 0.0 {
            self.positives[arm.slot()] += 1;
        }
        self.plays[arm.slot()] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn branch_selection() {
        let s = ROptimalState { positives: [3, 1, 0, 0], plays: [5, 5, 1, 1], cycle: Cycle::default() };
        assert_eq!(roptimal_choice(&s.rates(), 0.7), Arm::Up);
        assert_eq!(roptimal_choice(&s.rates(), 0.2), Arm::Right);
        let s = ROptimalState { positives: [0, 0, 1, 4], plays: [1, 1, 6, 6], cycle: Cycle::default() };
        assert_eq!(roptimal_choice(&s.rates(), 0.2), Arm::Left);
    }

    #[test]
    fn fresh_state_breaks_ties_low() {
        let s = ROptimalState::new();
        assert_eq!(roptimal_choice(&s.rates(), 0.9), Arm::Up);
        assert_eq!(roptimal_choice(&s.rates(), 0.1), Arm::Right);
        assert_eq!(roptimal_choice(&s.rates(), 0.5), Arm::Right);
    }

    #[test]
    fn negative_reward_reverses_on_commit() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = ROptimalState::new();
        s.step(1, None, &mut rng).unwrap();
        s.cycle.last_arm = Some(Arm::Right);
        s.step(2, Some(0.1), &mut rng).unwrap();
        s.cycle.last_arm = Some(Arm::Right);
        assert_eq!(s.step(3, Some(-0.2), &mut rng).unwrap(), Arm::Left);
    }

    proptest! {
        #[test]
        fn tallies_track_completed_turns(
            seed in any::<u64>(),
            rewards in proptest::collection::vec(-1.0f64..1.0, 1..300),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = ROptimalState::new();
            s.step(1, None, &mut rng).unwrap();
            for (i, r) in rewards.iter().enumerate() {
                s.step(i as u64 + 2, Some(*r), &mut rng).unwrap();
                let completed = i as u64 + 1;
                prop_assert_eq!(s.plays.iter().sum::<u64>() - 4, completed);
                for k in 0..4 {
                    prop_assert!(s.plays[k] >= 1);
                    prop_assert!(s.positives[k] < s.plays[k]);
                }
            }
        }
    }
}
