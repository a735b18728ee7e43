//! Training runs against the simulated trainer.

use std::sync::Arc;

use super::config::ExperimentConfig;
use super::log::{LogHeader, LogSource, TrainingLog};
use super::online::TrainingLoop;
use crate::error::{invalid, Result};
use crate::features::build_theta;
use crate::learner::{select_action, HumanRewardModel};
use crate::rng::SplitMix64;
use crate::sim::{LevelSet, World};
use crate::trainer::SimulatedTrainer;

/// Result of one simulated training run.
#[derive(Clone, Debug)]
pub struct LiveRun {
    pub log: TrainingLog,
    /// The learner after every keypress has been accounted for.
    pub model: HumanRewardModel,
    /// The learner as it stood at each checkpoint step.
    pub checkpoints: Vec<(u64, HumanRewardModel)>,
}

/// Seed of the simulated trainer for a run on environment seed `env_seed`.
pub fn trainer_seed(env_seed: u64) -> u64 {
    SplitMix64::derive(env_seed, 1).next_u64()
}

/// Runs the learner online for `steps` steps under the configured trainer.
///
/// Step `k` covers `[k, k + 1] / tick_rate` seconds. It is finalized and
/// trained on once `lag_steps` more steps have passed, when no later keypress
/// can reach it; replays use the same schedule.
pub fn run_live_training(env_seed: u64, config: &ExperimentConfig, steps: u64) -> Result<LiveRun> {
    if steps == 0 {
        return Err(invalid("a training run needs at least one step"));
    }
    config.validate()?;
    let levels = Arc::new(LevelSet::generate(config.level_seed));
    let mut world = World::new(levels, config.physics, env_seed);
    let mut trainer = SimulatedTrainer::new(config.trainer.clone(), trainer_seed(env_seed))?;
    let mut header = LogHeader::new(LogSource::Simulated, env_seed, config.level_seed, config.tick_rate, config.learner.pdf);
    header.tags.insert("trainer".into(), serde_json::to_string(&config.trainer)?);
    let mut lp = TrainingLoop::new(config.learner.build(), header);

    let rate = config.tick_rate;
    let lag = config.lag_steps();
    let mut checkpoints = Vec::new();
    for k in 0..steps {
        if world.is_game_over() {
            world.new_game();
        }
        let features = build_theta(&world.observe());
        let theta = features.flat();
        let action = select_action(lp.model(), &theta);
        let result = world.step(action)?;
        let (start, end) = (k as f64 / rate, (k + 1) as f64 / rate);
        lp.record_step(theta, action, start, end, result.score_delta)?;
        if let Some(event) = trainer.judge(k, &features, action, end) {
            lp.press(event, None);
        }
        lp.advance(end);
        if let Some(last) = k.checked_sub(lag) {
            lp.release_through(last)?;
        }
        if (k + 1) % config.checkpoint_every == 0 {
            checkpoints.push((k + 1, lp.model().clone()));
        }
    }
    let (log, model) = lp.finish()?;
    Ok(LiveRun { log, model, checkpoints })
}
