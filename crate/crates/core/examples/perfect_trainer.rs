//! Trains with a flawless simulated trainer and tests the greedy policy
//! offline, once per environment seed.

use std::sync::Arc;
use std::time::Instant;

use tamer_core::harness::{evaluate_policy, run_live_training, ExperimentConfig};
use tamer_core::sim::LevelSet;

fn main() -> tamer_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let config = ExperimentConfig::perfect_trainer();
    let levels = Arc::new(LevelSet::generate(config.level_seed));
    let mut passed = 0;
    for seed in 0..runs {
        let t = Instant::now();
        let run = run_live_training(seed, &config, steps)?;
        let eval = evaluate_policy(&run.model, &levels, config.physics, &config.eval);
        let labeled = run.log.labeled_steps().len();
        if eval.mean_score >= 100.0 {
            passed += 1;
        }
        println!(
            "seed {seed}: {labeled} labeled steps, mean offline score {:.2} (min {:.2}) in {:.1?}",
            eval.mean_score,
            eval.scores.iter().copied().fold(f64::INFINITY, f64::min),
            t.elapsed()
        );
    }
    println!("{passed}/{runs} runs reached a mean of 100");
    Ok(())
}
