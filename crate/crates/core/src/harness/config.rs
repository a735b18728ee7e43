use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::learner::{DelayPdf, LearnerConfig};
use crate::sim::{Physics, DEFAULT_LEVEL_SEED};
use crate::trainer::{TrainerDelay, TrainerProfile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Games per offline test.
    pub games: usize,
    /// Environment seed of the first test game; the rest follow consecutively.
    pub seed_base: u64,
    /// Steps after which a test game is stopped and scored as it stands.
    pub max_steps: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { games: 20, seed_base: 1_000_000, max_steps: 3000 }
    }
}

impl EvalConfig {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.games as u64).map(|i| self.seed_base + i).collect()
    }
}

/// Everything that shapes an experiment, as one JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Simulated steps per second.
    pub tick_rate: f64,
    pub level_seed: u64,
    pub physics: Physics,
    pub learner: LearnerConfig,
    pub trainer: TrainerProfile,
    /// Training steps per run.
    pub steps: u64,
    pub checkpoint_every: u64,
    pub eval: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tick_rate: 24.0,
            level_seed: DEFAULT_LEVEL_SEED,
            physics: Physics::default(),
            learner: LearnerConfig::default(),
            trainer: TrainerProfile::default(),
            steps: 2800,
            checkpoint_every: 200,
            eval: EvalConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// A trainer that always responds, is never wrong, and reacts after a
    /// fixed delay the learner's delay density covers within a single step,
    /// so every keypress lands wholly on the step it judged.
    pub fn perfect_trainer() -> Self {
        let base = Self::default();
        let delay = 0.25;
        let pdf = DelayPdf::uniform(delay, delay + 1.0 / base.tick_rate).expect("valid support");
        Self {
            trainer: TrainerProfile::perfect(delay),
            learner: LearnerConfig { pdf, ..base.learner.clone() },
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tick_rate > 0.0 && self.tick_rate.is_finite()) {
            return Err(invalid("tick rate must be positive"));
        }
        if self.checkpoint_every == 0 {
            return Err(invalid("checkpoint interval must be positive"));
        }
        if self.eval.games == 0 {
            return Err(invalid("evaluation needs at least one game"));
        }
        if !(self.learner.alpha > 0.0 && self.learner.alpha.is_finite()) {
            return Err(invalid("learning rate must be positive"));
        }
        if let TrainerDelay::Random(pdf) = self.trainer.delay {
            DelayPdf::uniform(pdf.lo(), pdf.hi())?;
        }
        self.trainer.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Steps a finished step waits before no later keypress can reach it.
    pub fn lag_steps(&self) -> u64 {
        self.learner.pdf.lag_steps(self.tick_rate)
    }

    /// Checkpoint step counts: every interval up to the run length.
    pub fn checkpoints(&self) -> Vec<u64> {
        (1..=self.steps / self.checkpoint_every).map(|k| k * self.checkpoint_every).collect()
    }
}
