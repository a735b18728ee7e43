//! Channel comparison over a set of logs: mean curves, final-score
//! distribution, and ordering statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::log::TrainingLog;
use super::replay::{run_replay_training, LearningCurve};
use super::stats::{fraction_between, mean, paired_t_greater, spearman, std_dev, Histogram, PairedTest};
use crate::channels::ChannelSpec;
use crate::error::{invalid, Result};

/// Final-score band that should stay nearly empty: above a failed first
/// level, below a finished one.
pub const GAP_BAND: (f64, f64) = (40.0, 90.0);
pub const HISTOGRAM_WIDTH: f64 = 25.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: u64,
    pub mean_score: f64,
    pub std_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSummary {
    pub channel: ChannelSpec,
    pub label: String,
    pub curve: Vec<CurvePoint>,
    /// Final checkpoint score of each log, in log order.
    pub final_scores: Vec<f64>,
    pub final_mean: f64,
    pub final_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ordering {
    /// Rank correlation between channel position and mean final score.
    pub spearman: f64,
    /// Last channel against first, paired by log.
    pub last_over_first: PairedTest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub logs: usize,
    pub channels: Vec<ChannelSummary>,
    pub histogram: Histogram,
    pub modes: Vec<f64>,
    pub gap_fraction: f64,
    /// Present when at least two channels were compared.
    pub ordering: Option<Ordering>,
    #[serde(skip)]
    pub curves: Vec<Vec<LearningCurve>>,
}

impl ChannelReport {
    pub fn channel(&self, label: &str) -> Option<&ChannelSummary> {
        self.channels.iter().find(|c| c.label == label)
    }

    /// All final scores across logs and channels.
    pub fn final_scores(&self) -> Vec<f64> {
        self.channels.iter().flat_map(|c| c.final_scores.iter().copied()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,channel,mean_score,std_score\n");
        for c in &self.channels {
            for p in &c.curve {
                out.push_str(&format!("{},{},{:.4},{:.4}\n", p.step, c.label, p.mean_score, p.std_score));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// CSV-safe channel name.
pub fn channel_label(spec: &ChannelSpec) -> String {
    match *spec {
        ChannelSpec::Keypress => "keypress".into(),
        ChannelSpec::Binary => "binary".into(),
        ChannelSpec::Random { .. } => "random".into(),
        ChannelSpec::Noisy { p_pos, p_neg, .. } if p_pos == p_neg => format!("noisy-{p_pos}"),
        ChannelSpec::Noisy { p_pos, p_neg, .. } => format!("noisy-{p_pos}-{p_neg}"),
    }
}

/// Replays every log through every channel, in parallel, and summarizes.
/// Channels are expected in order of increasing label quality for the
/// ordering statistics.
pub fn compare_channels(logs: &[TrainingLog], channels: &[ChannelSpec], config: &ExperimentConfig) -> Result<ChannelReport> {
    if logs.is_empty() || channels.is_empty() {
        return Err(invalid("comparison needs at least one log and one channel"));
    }
    let jobs: Vec<(usize, usize)> = (0..channels.len()).flat_map(|c| (0..logs.len()).map(move |l| (c, l))).collect();
    let results: Vec<LearningCurve> = jobs
        .par_iter()
        .map(|&(c, l)| run_replay_training(&logs[l], &channels[c], config))
        .collect::<Result<_>>()?;
    let curves: Vec<Vec<LearningCurve>> = results.chunks(logs.len()).map(<[_]>::to_vec).collect();

    let summaries: Vec<ChannelSummary> = channels
        .iter()
        .zip(&curves)
        .map(|(spec, per_log)| {
            let curve = (0..per_log[0].checkpoints.len())
                .map(|i| {
                    let scores: Vec<f64> = per_log.iter().map(|c| c.checkpoints[i].mean_score).collect();
                    CurvePoint { step: per_log[0].checkpoints[i].step, mean_score: mean(&scores), std_score: std_dev(&scores) }
                })
                .collect();
            let final_scores: Vec<f64> = per_log.iter().map(|c| c.final_score().unwrap_or(f64::NAN)).collect();
            ChannelSummary {
                channel: *spec,
                label: channel_label(spec),
                curve,
                final_mean: mean(&final_scores),
                final_std: std_dev(&final_scores),
                final_scores,
            }
        })
        .collect();

    let all_finals: Vec<f64> = summaries.iter().flat_map(|s| s.final_scores.iter().copied()).collect();
    let histogram = Histogram::new(&all_finals, HISTOGRAM_WIDTH);
    let ordering = (summaries.len() >= 2).then(|| {
        let positions: Vec<f64> = (0..summaries.len()).map(|i| i as f64).collect();
        let means: Vec<f64> = summaries.iter().map(|s| s.final_mean).collect();
        let first = &summaries[0].final_scores;
        let last = &summaries[summaries.len() - 1].final_scores;
        Ordering { spearman: spearman(&positions, &means), last_over_first: paired_t_greater(last, first) }
    });
    Ok(ChannelReport {
        logs: logs.len(),
        modes: histogram.modes(),
        gap_fraction: fraction_between(&all_finals, GAP_BAND.0, GAP_BAND.1),
        histogram,
        channels: summaries,
        ordering,
        curves,
    })
}
