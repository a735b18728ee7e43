//! Relabels one simulated training log through each feedback channel and
//! shows how the labels change.

use tamer_core::channels::{relabel_log, ChannelSpec};
use tamer_core::harness::{run_live_training, ExperimentConfig};

fn main() -> tamer_core::Result<()> {
    let config = ExperimentConfig::default();
    let run = run_live_training(7, &config, 1200)?;
    let channels = [
        ChannelSpec::Keypress,
        ChannelSpec::Binary,
        ChannelSpec::noisy(0.78, 0.78, 1)?,
        ChannelSpec::preset("facial-competitive", 1)?,
        ChannelSpec::Random { seed: 1 },
    ];
    let original: Vec<f64> = run.log.records.iter().map(|r| r.h).collect();
    println!("{} steps, {} labelled", original.len(), original.iter().filter(|h| **h != 0.0).count());
    for spec in &channels {
        let relabelled = relabel_log(&run.log, spec)?;
        let labels: Vec<f64> = relabelled.records.iter().map(|r| r.h).filter(|h| *h != 0.0).collect();
        let positive = labels.iter().filter(|h| **h > 0.0).count();
        let agree = relabelled.records.iter().zip(&original).filter(|(r, h)| **h != 0.0 && r.h.signum() == h.signum()).count();
        println!(
            "{:<28} {:>4} labels, {:>4} positive, sign agrees with the trainer on {:.1}%",
            spec.label(),
            labels.len(),
            positive,
            100.0 * agree as f64 / labels.len().max(1) as f64
        );
    }
    Ok(())
}
