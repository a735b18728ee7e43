use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::EvalConfig;
use crate::features::build_theta;
use crate::learner::{select_action, RewardEstimate};
use crate::sim::{LevelSet, Physics, World};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub mean_score: f64,
    pub scores: Vec<f64>,
}

/// Plays one greedy game from level 0 until Mario dies or the step cap.
pub fn play_game<M: RewardEstimate + ?Sized>(
    model: &M,
    levels: &Arc<LevelSet>,
    physics: Physics,
    seed: u64,
    max_steps: u64,
) -> f64 {
    let mut world = World::new(levels.clone(), physics, seed);
    while !world.is_game_over() && world.step_index() < max_steps {
        let theta = build_theta(&world.observe()).flat();
        world.step(select_action(model, &theta)).expect("game still running");
    }
    world.score().points()
}

/// Scores the frozen greedy policy over the configured test games. Games run
/// in parallel; scores come back in seed order.
pub fn evaluate_policy<M: RewardEstimate + Sync + ?Sized>(
    model: &M,
    levels: &Arc<LevelSet>,
    physics: Physics,
    eval: &EvalConfig,
) -> Evaluation {
    let scores: Vec<f64> =
        eval.seeds().par_iter().map(|&seed| play_game(model, levels, physics, seed, eval.max_steps)).collect();
    let mean_score = scores.iter().sum::<f64>() / scores.len() as f64;
    Evaluation { mean_score, scores }
}
