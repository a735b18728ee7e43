//! Simulated trainer: a scripted reference player plus a feedback model that
//! rewards the agent for matching it, at a decaying rate, with occasional sign
//! errors and a random reaction delay.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::features::{build_theta, FeatureVector, SalientClass, SalientFeature};
use crate::learner::{DelayPdf, FeedbackEvent};
use crate::rng::SplitMix64;
use crate::sim::{Action, Direction, Observation};

/// Jump when a pit's centre is this close ahead (tiles).
const PIT_AHEAD: (f64, f64) = (-1.0, 2.5);
/// Jump window for an enemy, horizontally and vertically (tiles).
const ENEMY_DX: (f64, f64) = (-0.5, 3.5);
const ENEMY_DY: (f64, f64) = (-1.5, 2.5);

pub const RUN_RIGHT: Action = Action::new(Direction::Right, false, true);
pub const JUMP_RIGHT: Action = Action::new(Direction::Right, true, true);

fn within(v: f64, (lo, hi): (f64, f64)) -> bool {
    lo <= v && v <= hi
}

fn is_threat(f: &SalientFeature) -> bool {
    match f.class {
        Some(SalientClass::Pit) => within(f.dx, PIT_AHEAD),
        Some(SalientClass::Enemy) => within(f.dx, ENEMY_DX) && within(f.dy, ENEMY_DY),
        _ => false,
    }
}

/// The reference policy on the agent's own features: sprint right, jump at a
/// wall in front, a pit just ahead or a nearby enemy.
pub fn oracle_from_features(features: &FeatureVector) -> Action {
    if features.phi_m.right_of_wall || is_threat(&features.phi1) || is_threat(&features.phi2) {
        JUMP_RIGHT
    } else {
        RUN_RIGHT
    }
}

pub fn oracle_action(obs: &Observation) -> Action {
    oracle_from_features(&build_theta(obs))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleId {
    #[default]
    RunAndJump,
}

/// How the trainer's reaction delay is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrainerDelay {
    /// Drawn from a delay density.
    Random(DelayPdf),
    /// Always the same number of seconds.
    Fixed { seconds: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerProfile {
    /// Chance of giving feedback on a step at the start of training.
    pub initial_rate: f64,
    /// Steps for the rate to halve; `None` keeps it constant.
    pub half_life: Option<f64>,
    /// Chance that a given keypress has the wrong sign.
    pub error_rate: f64,
    pub delay: TrainerDelay,
    pub oracle: OracleId,
}

impl Default for TrainerProfile {
    fn default() -> Self {
        Self {
            initial_rate: 0.3,
            half_life: Some(800.0),
            error_rate: 0.05,
            delay: TrainerDelay::Random(DelayPdf::default()),
            oracle: OracleId::RunAndJump,
        }
    }
}

impl TrainerProfile {
    /// Never wrong, always responding, with a fixed delay of `seconds`.
    pub fn perfect(seconds: f64) -> Self {
        Self {
            initial_rate: 1.0,
            half_life: None,
            error_rate: 0.0,
            delay: TrainerDelay::Fixed { seconds },
            oracle: OracleId::RunAndJump,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.initial_rate) {
            return Err(invalid("feedback rate must lie in [0, 1]"));
        }
        if !(0.0..0.5).contains(&self.error_rate) {
            return Err(invalid("error rate must lie in [0, 0.5)"));
        }
        if self.half_life.is_some_and(|h| !(h > 0.0 && h.is_finite())) {
            return Err(invalid("half-life must be positive"));
        }
        if let TrainerDelay::Fixed { seconds } = self.delay {
            if !(seconds >= 0.0 && seconds.is_finite()) {
                return Err(invalid("fixed delay must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn rate(&self, step: u64) -> f64 {
        match self.half_life {
            Some(h) => self.initial_rate * 0.5f64.powf(step as f64 / h),
            None => self.initial_rate,
        }
    }
}

/// A seeded trainer following one profile.
#[derive(Clone, Debug)]
pub struct SimulatedTrainer {
    profile: TrainerProfile,
    rng: SplitMix64,
}

impl SimulatedTrainer {
    pub fn new(profile: TrainerProfile, seed: u64) -> Result<Self> {
        profile.validate()?;
        Ok(Self { profile, rng: SplitMix64::new(seed) })
    }

    pub fn profile(&self) -> &TrainerProfile {
        &self.profile
    }

    pub fn oracle(&self, features: &FeatureVector) -> Action {
        match self.profile.oracle {
            OracleId::RunAndJump => oracle_from_features(features),
        }
    }

    /// Watches the agent take `action` on step `step` (which ended at
    /// `step_end`) and maybe presses a key. Three draws are made on every call
    /// so the stream stays aligned whatever happens.
    pub fn judge(&mut self, step: u64, features: &FeatureVector, action: Action, step_end: f64) -> Option<FeedbackEvent> {
        let emit = self.rng.chance(self.profile.rate(step));
        let flip = self.rng.chance(self.profile.error_rate);
        let delay = match self.profile.delay {
            TrainerDelay::Random(pdf) => pdf.sample(&mut self.rng),
            TrainerDelay::Fixed { seconds } => {
                self.rng.next_u64();
                seconds
            }
        };
        if !emit {
            return None;
        }
        let approve = (action == self.oracle(features)) != flip;
        let time = step_end + delay;
        Some(if approve { FeedbackEvent::positive(time) } else { FeedbackEvent::negative(time) })
    }
}
