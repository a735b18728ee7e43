//! Experiment orchestration: simulated training runs, logs, replays under
//! feedback channels, offline tests and channel comparisons.

pub mod compare;
pub mod config;
pub mod eval;
pub mod log;
pub mod online;
pub mod replay;
pub mod simulate;
pub mod stats;

pub use compare::{channel_label, compare_channels, ChannelReport, ChannelSummary, CurvePoint, GAP_BAND};
pub use config::{EvalConfig, ExperimentConfig};
pub use eval::{evaluate_policy, play_game, Evaluation};
pub use log::{EventRecord, LogHeader, LogSource, StepRecord, TrainingLog};
pub use online::TrainingLoop;
pub use replay::{replay_models, run_replay_training, Checkpoint, LearningCurve};
pub use simulate::{run_live_training, trainer_seed, LiveRun};
