//! Learning a platformer policy from human evaluative feedback: a tile-based
//! game, state features, the reward-model learner, a simulated trainer,
//! feedback channels and the replay experiment harness.

pub mod channels;
pub mod error;
pub mod features;
pub mod harness;
pub mod learner;
pub mod rng;
pub mod sim;
pub mod trainer;

pub use error::{Error, Result};
