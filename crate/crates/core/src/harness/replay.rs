//! Offline replay: retrain from a log's fixed trajectory under a feedback
//! channel and test the policy at each checkpoint.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::eval::evaluate_policy;
use super::log::TrainingLog;
use crate::channels::{relabel_log, ChannelSpec};
use crate::error::Result;
use crate::learner::{CreditedSample, HumanRewardModel};
use crate::sim::LevelSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: u64,
    pub model_hash: String,
    pub mean_score: f64,
    pub scores: Vec<f64>,
    #[serde(skip)]
    pub model: Option<HumanRewardModel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub channel: ChannelSpec,
    pub env_seed: u64,
    pub checkpoints: Vec<Checkpoint>,
}

impl LearningCurve {
    pub fn final_score(&self) -> Option<f64> {
        self.checkpoints.last().map(|c| c.mean_score)
    }
}

/// Models the learner would have held at each checkpoint, trained on the
/// log's labels after passing them through `channel`.
pub fn replay_models(log: &TrainingLog, channel: &ChannelSpec, config: &ExperimentConfig) -> Result<Vec<(u64, HumanRewardModel)>> {
    config.validate()?;
    let relabeled = relabel_log(log, channel)?;
    let lag = log.header.pdf.lag_steps(log.header.tick_rate);
    let mut model = config.learner.build();
    let mut next = 0usize;
    let mut out = Vec::new();
    for c in config.checkpoints() {
        // Steps finalized by the end of step c - 1.
        let upto = (c - 1).checked_sub(lag);
        while let Some(r) = relabeled.records.get(next) {
            if upto.is_none_or(|u| r.step > u) {
                break;
            }
            if r.h != 0.0 {
                model.update(&CreditedSample { theta: r.theta, action: r.action, h: r.h })?;
            }
            next += 1;
        }
        out.push((c, model.clone()));
    }
    Ok(out)
}

/// Replays `log` through `channel` and evaluates every checkpoint on the
/// shared test games.
pub fn run_replay_training(log: &TrainingLog, channel: &ChannelSpec, config: &ExperimentConfig) -> Result<LearningCurve> {
    let models = replay_models(log, channel, config)?;
    let levels = Arc::new(LevelSet::generate(config.level_seed));
    let checkpoints = models
        .into_par_iter()
        .map(|(step, model)| {
            let eval = evaluate_policy(&model, &levels, config.physics, &config.eval);
            Checkpoint { step, model_hash: model.hash(), mean_score: eval.mean_score, scores: eval.scores, model: Some(model) }
        })
        .collect();
    Ok(LearningCurve { channel: *channel, env_seed: log.header.env_seed, checkpoints })
}
