//! Worked examples checked against independent computations: brute-force
//! searches, closed forms and distributional tests.

use std::sync::Arc;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use tamer_core::channels::{corrupt, random_label, relabel_log, ChannelSpec};
use tamer_core::features::{build_theta, Theta, SENTINEL_DIST, THETA_LEN};
use tamer_core::harness::{
    compare_channels, evaluate_policy, replay_models, run_live_training, run_replay_training, EvalConfig, ExperimentConfig, LogHeader,
    LogSource, TrainingLoop,
};
use tamer_core::learner::{
    select_action, CreditedSample, DelayPdf, FeedbackEvent, HumanRewardModel, LearnerConfig, LinearRewardModel, ModelTreeRewardModel,
    RewardEstimate, TreeParams,
};
use tamer_core::rng::SplitMix64;
use tamer_core::sim::{Action, LevelSet, Physics, Score, World};
use tamer_core::trainer::{oracle_action, oracle_from_features, SimulatedTrainer, TrainerProfile};

const PIT_FLAG: usize = 0;

fn pit_samples(n: usize, seed: u64) -> Vec<(Theta, f64)> {
    let mut rng = SplitMix64::new(seed);
    (0..n)
        .map(|_| {
            let mut theta = [0.0; THETA_LEN];
            for x in theta.iter_mut() {
                *x = rng.uniform(-1.0, 1.0);
            }
            // Distance to a second object: always positive, like the real one.
            theta[19] = rng.uniform(2.0, SENTINEL_DIST);
            let pit = rng.chance(0.5);
            theta[PIT_FLAG] = if pit { 1.0 } else { 0.0 };
            (theta, if pit { -5.0 } else { 1.0 })
        })
        .collect()
}

/// Feature whose best single threshold removes the most squared error,
/// by trying every threshold on every feature.
fn brute_force_split_feature(samples: &[(Theta, f64)]) -> usize {
    let sse = |ys: &[f64]| {
        let m = ys.iter().sum::<f64>() / ys.len().max(1) as f64;
        ys.iter().map(|y| (y - m).powi(2)).sum::<f64>()
    };
    let mut best = (f64::NEG_INFINITY, 0);
    for f in 0..THETA_LEN {
        for (t, _) in samples {
            let (l, r): (Vec<&(Theta, f64)>, Vec<&(Theta, f64)>) = samples.iter().partition(|s| s.0[f] <= t[f]);
            if l.is_empty() || r.is_empty() {
                continue;
            }
            let ly: Vec<f64> = l.iter().map(|s| s.1).collect();
            let ry: Vec<f64> = r.iter().map(|s| s.1).collect();
            let all: Vec<f64> = samples.iter().map(|s| s.1).collect();
            let gain = sse(&all) - sse(&ly) - sse(&ry);
            if gain > best.0 {
                best = (gain, f);
            }
        }
    }
    best.1
}

#[test]
fn tree_splits_on_the_pit_flag() {
    let samples = pit_samples(500, 1);
    let action = Action::from_index(9).unwrap();
    let mut model = ModelTreeRewardModel::new(0.01, TreeParams::default());
    for (theta, h) in &samples {
        model.update(&CreditedSample { theta: *theta, action, h: *h }).unwrap();
    }
    let (feature, threshold) = model.tree(action).root_split().expect("the tree split");
    assert_eq!(feature, brute_force_split_feature(&samples));
    assert_eq!(feature, PIT_FLAG);
    assert!(threshold > 0.0 && threshold < 1.0);
}

/// Leaves need at least as many samples as there are features for their
/// linear models to be determined; below that a 500-sample task overfits.
#[test]
fn tree_fits_the_pit_target_better_than_a_linear_model() {
    let action = Action::from_index(9).unwrap();
    let params = TreeParams { min_leaf: THETA_LEN, ..TreeParams::default() };
    for seed in 0..5 {
        let train = pit_samples(500, 2 * seed + 2);
        let test = pit_samples(500, 2 * seed + 3);
        let mut tree = ModelTreeRewardModel::new(0.005, params);
        let mut linear = LinearRewardModel::new(0.005);
        for _ in 0..30 {
            for (theta, h) in &train {
                let s = CreditedSample { theta: *theta, action, h: *h };
                tree.update(&s).unwrap();
                linear.update(&s).unwrap();
            }
        }
        let mse = |m: &dyn RewardEstimate| test.iter().map(|(t, h)| (h - m.predict(t, action)).powi(2)).sum::<f64>() / test.len() as f64;
        let (tree_mse, linear_mse) = (mse(&tree), mse(&linear));
        assert!(tree_mse < linear_mse, "seed {seed}: tree {tree_mse} vs linear {linear_mse}");
    }
}

#[test]
fn feedback_thins_out_over_training() {
    let profile = TrainerProfile { half_life: Some(500.0), ..TrainerProfile::default() };
    let features = build_theta(&World::new(Arc::new(LevelSet::generate(121)), Physics::default(), 0).observe());
    let (mut early, mut late) = (0, 0);
    for seed in 0..50 {
        let mut trainer = SimulatedTrainer::new(profile.clone(), seed).unwrap();
        for step in 0..2200u64 {
            let pressed = trainer.judge(step, &features, Action::from_index(9).unwrap(), step as f64 / 24.0).is_some();
            if pressed && step < 200 {
                early += 1;
            }
            if pressed && step >= 2000 {
                late += 1;
            }
        }
    }
    assert!(early > late, "early {early} late {late}");
}

#[test]
fn reaction_delays_follow_the_delay_density() {
    let pdf = DelayPdf::default();
    let profile = TrainerProfile { initial_rate: 1.0, half_life: None, ..TrainerProfile::default() };
    let features = build_theta(&World::new(Arc::new(LevelSet::generate(121)), Physics::default(), 0).observe());
    let mut trainer = SimulatedTrainer::new(profile, 17).unwrap();
    let mut delays: Vec<f64> = (0..10_000u64)
        .map(|k| {
            let end = k as f64;
            trainer.judge(k, &features, Action::from_index(0).unwrap(), end).expect("always responds").time - end
        })
        .collect();
    delays.sort_by(f64::total_cmp);
    let n = delays.len() as f64;
    let cdf = |t: f64| ((t - pdf.lo()) / (pdf.hi() - pdf.lo())).clamp(0.0, 1.0);
    let sup = delays
        .iter()
        .enumerate()
        .map(|(i, &d)| (cdf(d) - i as f64 / n).abs().max((cdf(d) - (i + 1) as f64 / n).abs()))
        .fold(0.0, f64::max);
    assert!(sup <= 0.02, "sup-norm distance {sup}");
}

#[test]
fn coin_flip_noise_matches_the_random_channel() {
    let mut input = SplitMix64::new(5);
    let mut noisy_rng = SplitMix64::new(6);
    let mut random_rng = SplitMix64::new(7);
    let (mut noisy_pos, mut random_pos) = (0.0, 0.0);
    let n = 10_000;
    for _ in 0..n {
        let label = if input.chance(0.7) { 1.0 } else { -1.0 };
        if corrupt(label, 0.5, 0.5, &mut noisy_rng) > 0.0 {
            noisy_pos += 1.0;
        }
        if random_label(&mut random_rng) > 0.0 {
            random_pos += 1.0;
        }
    }
    // Two-sample chi-square test of equal positive rates.
    let n = n as f64;
    let pooled = (noisy_pos + random_pos) / (2.0 * n);
    let expected = [pooled * n, (1.0 - pooled) * n];
    let chi2: f64 = [(noisy_pos, expected[0]), (n - noisy_pos, expected[1]), (random_pos, expected[0]), (n - random_pos, expected[1])]
        .iter()
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let p = 1.0 - ChiSquared::new(1.0).unwrap().cdf(chi2);
    assert!(p > 0.01, "chi-square {chi2}, p {p}");
}

#[test]
fn oracle_finishes_level_zero_quickly() {
    let levels = Arc::new(LevelSet::generate(121));
    for seed in 0..20 {
        let mut world = World::new(levels.clone(), Physics::default(), seed);
        let mut steps = 0;
        while world.level_number() == 0 {
            assert!(!world.is_game_over(), "seed {seed}: died on level 0");
            world.step(oracle_action(&world.observe())).unwrap();
            steps += 1;
            assert!(steps < 600, "seed {seed}: level 0 not finished");
        }
    }
}

#[test]
fn perfectly_trained_agent_agrees_with_the_oracle_on_its_path() {
    let config = ExperimentConfig::perfect_trainer();
    let levels = Arc::new(LevelSet::generate(config.level_seed));
    let mut agreements = Vec::new();
    for seed in 0..5 {
        let run = run_live_training(seed, &config, 2000).unwrap();
        let mut world = World::new(levels.clone(), config.physics, 10_000 + seed);
        let (mut same, mut total) = (0, 0);
        while world.level_number() == 0 && !world.is_game_over() {
            let features = build_theta(&world.observe());
            let oracle = oracle_from_features(&features);
            same += usize::from(select_action(&run.model, &features.flat()) == oracle);
            total += 1;
            world.step(oracle).unwrap();
        }
        agreements.push(same as f64 / total as f64);
    }
    let mean = agreements.iter().sum::<f64>() / agreements.len() as f64;
    assert!(mean >= 0.9, "agreement per seed {agreements:?}");
}

#[test]
fn several_presses_on_one_step_add_up() {
    // Support shorter than a step: each press lands wholly on one step.
    let pdf = DelayPdf::uniform(0.25, 0.29).unwrap();
    let header = LogHeader::new(LogSource::Live, 1, 121, 10.0, pdf);
    let mut lp = TrainingLoop::new(LearnerConfig::default().build(), header);
    lp.record_step([1.0; THETA_LEN], Action::from_index(9).unwrap(), 0.0, 0.1, Score(-1)).unwrap();
    for dt in [0.30, 0.32, 0.34] {
        lp.press(FeedbackEvent::positive(dt), None);
    }
    let (log, _) = lp.finish().unwrap();
    assert!((log.records[0].h - 3.0).abs() < 1e-12);
    assert_eq!(log.records[0].events.len(), 3);
}

#[test]
fn untrained_policy_is_fixed_and_evaluation_is_pure() {
    let config = ExperimentConfig::default();
    let levels = Arc::new(LevelSet::generate(config.level_seed));
    let model = LearnerConfig::default().build();
    let before = model.hash();
    let eval = EvalConfig { games: 4, ..EvalConfig::default() };
    let a = evaluate_policy(&model, &levels, config.physics, &eval);
    let b = evaluate_policy(&model, &levels, config.physics, &eval);
    assert_eq!(a, b);
    assert_eq!(model.hash(), before);
    // Action 0 is chosen everywhere; standing still runs out the clock.
    assert_eq!(select_action(&model, &[0.5; THETA_LEN]).index(), 0);
    assert!(a.scores.iter().all(|&s| (s + 30.0).abs() < 1e-9), "{:?}", a.scores);
}

#[test]
fn runs_are_reproducible_and_replay_matches_them() {
    let config = ExperimentConfig::default();
    assert!(run_live_training(3, &config, 0).is_err());
    let a = run_live_training(3, &config, config.steps).unwrap();
    let b = run_live_training(3, &config, config.steps).unwrap();
    assert_eq!(a.log.hash(), b.log.hash());
    assert_eq!(a.model.hash(), b.model.hash());

    let steps: Vec<u64> = a.checkpoints.iter().map(|c| c.0).collect();
    assert_eq!(steps, (1..=14).map(|k| 200 * k).collect::<Vec<_>>());
    assert_eq!(config.checkpoints(), steps);

    let replayed = replay_models(&a.log, &ChannelSpec::Keypress, &config).unwrap();
    assert_eq!(replayed.len(), a.checkpoints.len());
    for ((s1, live), (s2, replay)) in a.checkpoints.iter().zip(&replayed) {
        assert_eq!(s1, s2);
        assert_eq!(live.hash(), replay.hash(), "checkpoint {s1}");
    }
    // The keypress channel leaves the log untouched.
    assert_eq!(relabel_log(&a.log, &ChannelSpec::Keypress).unwrap().hash(), a.log.hash());
}

#[test]
fn single_log_report_is_that_curve() {
    let config = ExperimentConfig { steps: 600, eval: EvalConfig { games: 3, ..EvalConfig::default() }, ..ExperimentConfig::default() };
    let log = run_live_training(4, &config, config.steps).unwrap().log;
    let curve = run_replay_training(&log, &ChannelSpec::Binary, &config).unwrap();
    let report = compare_channels(std::slice::from_ref(&log), &[ChannelSpec::Binary], &config).unwrap();
    let summary = &report.channels[0];
    let means: Vec<f64> = summary.curve.iter().map(|p| p.mean_score).collect();
    assert_eq!(means, curve.checkpoints.iter().map(|c| c.mean_score).collect::<Vec<_>>());
    assert_eq!(summary.final_scores, vec![curve.final_score().unwrap()]);
    assert!(report.ordering.is_none());
}

#[test]
fn model_documents_round_trip() {
    let run = run_live_training(5, &ExperimentConfig::default(), 1000).unwrap();
    let text = run.model.to_json();
    let back = HumanRewardModel::from_json(&text).unwrap();
    assert_eq!(back.hash(), run.model.hash());
    assert_eq!(back.to_json(), text);
}
