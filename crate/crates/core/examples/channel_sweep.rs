//! Records simulated training logs, replays each under several feedback
//! channels, and prints the mean learning curves and ordering statistics.
//!
//! `cargo run --release --example channel_sweep -- [logs] [first-seed] [channels]`

use std::time::Instant;

use rayon::prelude::*;
use tamer_core::channels::ChannelSpec;
use tamer_core::harness::{compare_channels, run_live_training, ExperimentConfig, TrainingLog};

fn main() -> tamer_core::Result<()> {
    let logs_wanted: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed_base: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let chans = std::env::args()
        .nth(3)
        .unwrap_or_else(|| "random:seed=1;noisy:p=0.66,seed=1;noisy:p=0.78,seed=1;binary;keypress".into());
    let config = ExperimentConfig::default();
    let t = Instant::now();
    let logs: Vec<TrainingLog> = (seed_base..seed_base + logs_wanted)
        .into_par_iter()
        .map(|seed| run_live_training(seed, &config, config.steps).map(|run| run.log))
        .collect::<tamer_core::Result<_>>()?;
    println!("{} logs recorded in {:.1?}", logs.len(), t.elapsed());

    let channels: Vec<ChannelSpec> = chans.split(';').map(|s| s.parse()).collect::<tamer_core::Result<_>>()?;
    let report = compare_channels(&logs, &channels, &config)?;
    println!("replayed in {:.1?}", t.elapsed());
    for c in &report.channels {
        let curve: Vec<String> = c.curve.iter().map(|p| format!("{:.0}", p.mean_score)).collect();
        println!("{:<12} final {:>8.2} +- {:>7.2}  curve {}", c.label, c.final_mean, c.final_std, curve.join(" "));
    }
    println!("modes {:?}", report.modes);
    println!("fraction of final scores in the gap band: {:.3}", report.gap_fraction);
    if let Some(o) = &report.ordering {
        println!("spearman {:.3}, last over first: t {:.2} p {:.4}", o.spearman, o.last_over_first.t, o.last_over_first.p_value);
    }
    Ok(())
}
