//! Seed lineage.
//!
//! Every random draw in a trial comes from a ChaCha8 stream derived from the
//! experiment's master seed and the trial index:
//!
//! ```text
//! master seed --(stream = trial index)--> trial seed
//! trial seed  --(stream 0)--------------> initial placement
//! trial seed  --(stream 1 + player id)--> player's shadowing + policy draws
//! ```
//!
//! Configurations inside one experiment (policies, sweep points) share trial
//! seeds, so comparisons between them are made on common random numbers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// Seed of trial `trial_index` under `master_seed`.
pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng.next_u64()
}

/// Stream used to draw initial positions.
pub fn placement_rng(trial_seed: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(0);
    rng
}

/// Stream owned by one player: it drives the shadowing of the player's
/// incoming links and the player's policy.
pub fn player_rng(trial_seed: u64, player: usize) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(1 + player as u64);
    rng
}
