use rand::Rng;

use super::{cycle_step, Arm, Cycle, CycleRule};
use crate::Result;

/// Greedy: explore with a uniformly random arm, then apply the sign rule.
/// Carries no memory beyond the current cycle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyState {
    pub cycle: Cycle,
}

impl GreedyState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn step<R: Rng + ?Sized>(&mut self, turn: u64, reward: Option<f64>, rng: &mut R) -> Result<Arm> {
        cycle_step(self, turn, reward, rng)
    }
}

impl CycleRule for GreedyState {
    fn cycle(&mut self) -> &mut Cycle {
        &mut self.cycle
    }

    fn explore<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Arm {
        Arm::random(rng)
    }

    fn learn(&mut self, _arm: Arm, _reward: f64) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn drive(rewards: &[f64], seed: u64) -> (GreedyState, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = GreedyState::new();
        g.step(1, None, &mut rng).unwrap();
        for (i, r) in rewards.iter().enumerate() {
            g.step(i as u64 + 2, Some(*r), &mut rng).unwrap();
        }
        (g, rng)
    }

    #[test]
    fn positive_reward_repeats_the_arm() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut g = GreedyState::new();
        g.step(1, None, &mut rng).unwrap();
        g.cycle.last_arm = Some(Arm::PLUS_X);
        // turn 3 sees the reward of the turn-2 exploration arm
        let explored = g.step(2, Some(0.1), &mut rng).unwrap();
        assert_eq!(g.step(3, Some(0.3), &mut rng).unwrap(), explored);
        let explored = g.step(4, Some(0.1), &mut rng).unwrap();
        assert_eq!(g.step(5, Some(-0.3), &mut rng).unwrap(), explored.reverse());
    }

    #[test]
    fn exploration_ignores_reward_history() {
        // Same RNG consumption, opposite rewards: the even-turn decision must
        // not depend on anything observed earlier.
        let a = [0.5, -0.2, 0.1, 0.9, -0.7];
        let b = [-0.5, 0.2, -0.1, -0.9, 0.7];
        let (mut ga, mut ra) = drive(&a, 77);
        let (mut gb, mut rb) = drive(&b, 77);
        assert_eq!(ga.cycle.phase, gb.cycle.phase);
        ga.step(7, Some(0.4), &mut ra).unwrap();
        gb.step(7, Some(-0.4), &mut rb).unwrap();
        let ea = ga.step(8, Some(1.0), &mut ra).unwrap();
        let eb = gb.step(8, Some(-1.0), &mut rb).unwrap();
        assert_eq!(ea, eb);
    }
}
