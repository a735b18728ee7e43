//! Fits a per-action model tree and a linear model to a target that jumps
//! when a pit is the most salient object, then compares their test error.

use tamer_core::features::{Theta, SENTINEL_DIST, THETA_LEN};
use tamer_core::learner::{CreditedSample, LinearRewardModel, ModelTreeRewardModel, Node, RewardEstimate, TreeParams};
use tamer_core::rng::SplitMix64;
use tamer_core::sim::Action;

fn samples(n: usize, seed: u64) -> Vec<(Theta, f64)> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let mut theta = [0.0; THETA_LEN];
            for x in theta.iter_mut() {
                *x = rng.uniform(-1.0, 1.0);
            }
            theta[19] = rng.uniform(2.0, SENTINEL_DIST);
            let pit = rng.chance(0.5);
            theta[0] = if pit { 1.0 } else { 0.0 };
            (theta, if pit { -5.0 } else { 1.0 })
        })
        .collect()
}

fn main() -> tamer_core::Result<()> {
    let epochs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let (train, test) = (samples(500, 1), samples(500, 99));
    let action = Action::from_index(9)?;
    let mut tree = ModelTreeRewardModel::new(0.005, TreeParams::default());
    let mut linear = LinearRewardModel::new(0.005);
    for _ in 0..epochs {
        for (theta, h) in &train {
            let sample = CreditedSample { theta: *theta, action, h: *h };
            tree.update(&sample)?;
            linear.update(&sample)?;
        }
    }
    let mse = |m: &dyn RewardEstimate| test.iter().map(|(t, h)| (h - m.predict(t, action)).powi(2)).sum::<f64>() / test.len() as f64;
    println!("after {epochs} epochs: tree mse {:.4}, linear mse {:.4}", mse(&tree), mse(&linear));
    let fitted = tree.tree(action);
    println!("{} leaves, root split {:?}", fitted.leaf_count(), fitted.root_split());
    for (i, node) in fitted.nodes().iter().enumerate() {
        match node {
            Node::Split { feature, threshold, left, right } => println!("  node {i}: feature {feature} <= {threshold:.3} ? {left} : {right}"),
            Node::Leaf(_) => println!("  node {i}: leaf"),
        }
    }
    Ok(())
}
