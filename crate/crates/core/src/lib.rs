//! Decentralized rendezvous of mobile radio nodes that only observe
//! received-signal-strength (RSS) changes.
//!
//! The crate is split along the simulation pipeline:
//!
//! - [`channel`]: log-distance path loss with AR(1) correlated log-normal shadowing.
//! - [`policies`]: the four two-turn-cycle movement policies (Greedy, R-Exp3,
//!   R-Thompson, R-Optimal).
//! - [`engine`]: turn-synchronous two-player and multiplayer trials.
//! - [`analysis`]: closed-form reward distributions, positive-arm probabilities
//!   and meeting-time bounds.
//! - [`harness`]: configuration parsing, seeded trial fan-out and CSV output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod engine;
mod error;
pub mod harness;
pub mod policies;
pub mod seed;

pub use error::{Error, Result};
