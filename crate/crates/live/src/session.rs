//! One human training session, driven by explicit clock readings so it can be
//! run in real time by the server or step by step in tests.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use tamer_core::features::build_theta;
use tamer_core::features::Theta;
use tamer_core::harness::log::quantize_time;
use tamer_core::harness::{LogHeader, LogSource, TrainingLog, TrainingLoop};
use tamer_core::learner::{select_action, FeedbackEvent, HumanRewardModel, LearnerConfig};
use tamer_core::sim::{Action, LevelSet, Physics, Score, World, DEFAULT_LEVEL_SEED};

use crate::protocol::{Frame, Mode};
use crate::{LiveError, LiveResult};

/// Settings shared by every session a server runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub tick_rate: f64,
    pub level_seed: u64,
    pub physics: Physics,
    pub learner: LearnerConfig,
    /// Finished games shown before the bar window is cleared.
    pub bar_window: usize,
    /// Session length cap in seconds.
    pub max_seconds: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            tick_rate: 24.0,
            level_seed: DEFAULT_LEVEL_SEED,
            physics: Physics::default(),
            learner: LearnerConfig::default(),
            bar_window: 20,
            max_seconds: 900.0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> LiveResult<()> {
        if !(self.tick_rate.is_finite() && self.tick_rate > 0.0) {
            return Err(LiveError::Invalid(format!("tick rate must be positive, got {}", self.tick_rate)));
        }
        if self.bar_window == 0 {
            return Err(LiveError::Invalid("bar window must hold at least one game".into()));
        }
        if !(self.max_seconds.is_finite() && self.max_seconds > 0.0) {
            return Err(LiveError::Invalid("session cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionFlags {
    /// Recorded only; nothing in the session depends on it.
    pub facial_expression_told: bool,
    pub competitive: bool,
}

/// Per-game scores for the performance chart. Once the window holds its
/// capacity of finished games, the next finished game starts a fresh window.
#[derive(Clone, Debug, PartialEq)]
pub struct BarWindow {
    capacity: usize,
    finished: Vec<f64>,
    current: f64,
}

impl BarWindow {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), finished: Vec::new(), current: 0.0 }
    }

    pub fn set_current(&mut self, score: f64) {
        self.current = score;
    }

    pub fn finish_game(&mut self, score: f64) {
        if self.finished.len() == self.capacity {
            self.finished.clear();
        }
        self.finished.push(score);
        self.current = 0.0;
    }

    pub fn finished(&self) -> &[f64] {
        &self.finished
    }

    /// Finished games followed by the game in progress.
    pub fn bars(&self) -> Vec<f64> {
        let mut out = self.finished.clone();
        out.push(self.current);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TickOutcome {
    /// Final score of a game that ended on this tick.
    pub game_ended: Option<f64>,
    /// The session reached its time cap on this tick.
    pub closed: bool,
}

#[derive(Clone, Copy, Debug)]
struct Shown {
    theta: Theta,
    action: Action,
    start: f64,
    score_delta: Score,
}

/// A session's clock starts at `start`; all times passed in are seconds on the
/// server's clock and are logged relative to that start.
#[derive(Clone, Debug)]
pub struct Session {
    id: u64,
    name: String,
    flags: SessionFlags,
    group: Option<String>,
    config: SessionConfig,
    world: World,
    lp: TrainingLoop,
    bars: BarWindow,
    games: Vec<f64>,
    tick: u64,
    started_at: Option<f64>,
    elapsed: f64,
    shown: Option<Shown>,
    closed: bool,
}

impl Session {
    /// `env_seed` drives the environment's randomness.
    pub fn new(id: u64, name: &str, flags: SessionFlags, group: Option<String>, config: SessionConfig, env_seed: u64) -> LiveResult<Self> {
        let levels = Arc::new(LevelSet::generate(config.level_seed));
        Self::with_levels(id, name, flags, group, config, levels, env_seed)
    }

    /// A session on hand-made levels instead of the configured level seed.
    pub fn with_levels(
        id: u64,
        name: &str,
        flags: SessionFlags,
        group: Option<String>,
        config: SessionConfig,
        levels: Arc<LevelSet>,
        env_seed: u64,
    ) -> LiveResult<Self> {
        if name.trim().is_empty() {
            return Err(LiveError::Invalid("session name must not be empty".into()));
        }
        config.validate()?;
        let world = World::new(levels, config.physics, env_seed);
        let mut header = LogHeader::new(LogSource::Live, env_seed, config.level_seed, config.tick_rate, config.learner.pdf);
        header.tags.insert("name".into(), name.to_string());
        header.tags.insert("competitive".into(), flags.competitive.to_string());
        header.tags.insert("facial_expression_told".into(), flags.facial_expression_told.to_string());
        if let Some(g) = &group {
            header.tags.insert("group".into(), g.clone());
        }
        let lp = TrainingLoop::new(config.learner.build(), header);
        let bars = BarWindow::new(config.bar_window);
        Ok(Self {
            id,
            name: name.to_string(),
            flags,
            group,
            config,
            world,
            lp,
            bars,
            games: Vec::new(),
            tick: 0,
            started_at: None,
            elapsed: 0.0,
            shown: None,
            closed: false,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Renames the session, e.g. after a clash in its leaderboard group.
    pub fn set_display_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn flags(&self) -> &SessionFlags {
        &self.flags
    }

    pub fn group(&self) -> Option<&str> {
        self.group.as_deref()
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        if self.lp.is_training() {
            Mode::Training
        } else {
            Mode::NotTraining
        }
    }

    pub fn is_started(&self) -> bool {
        self.started_at.is_some()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn ticks(&self) -> u64 {
        self.tick
    }

    pub fn model(&self) -> &HumanRewardModel {
        self.lp.model()
    }

    pub fn bars(&self) -> &BarWindow {
        &self.bars
    }

    /// Final scores of every finished game, oldest first.
    pub fn games(&self) -> &[f64] {
        &self.games
    }

    /// Starts the clock; later calls are ignored.
    pub fn start(&mut self, now: f64) {
        if self.started_at.is_none() && !self.closed {
            self.started_at = Some(now);
        }
    }

    /// Session time of a server clock reading, rounded to what the log keeps
    /// so that credit computed live and from the log agree exactly.
    fn clock(&self, now: f64) -> Option<f64> {
        self.started_at.map(|t0| quantize_time((now - t0).clamp(0.0, self.config.max_seconds)))
    }

    pub fn toggle(&mut self) -> Mode {
        if !self.closed {
            let training = self.lp.is_training();
            self.lp.set_training(!training);
        }
        self.mode()
    }

    /// Stamps a keypress with the server time `now`. Returns whether it was
    /// accepted; presses before the start or after the close are not.
    pub fn submit_feedback(&mut self, sign: i8, client_time: Option<f64>, now: f64) -> LiveResult<bool> {
        if self.closed {
            return Ok(false);
        }
        let Some(t) = self.clock(now) else {
            return Ok(false);
        };
        let event = FeedbackEvent::new(sign, t).map_err(|e| LiveError::Invalid(e.to_string()))?;
        self.lp.press(event, client_time);
        Ok(true)
    }

    /// One environment step. The step shown since the previous tick is logged
    /// with its actual on-screen interval, so tick jitter changes timestamps
    /// only.
    pub fn tick(&mut self, now: f64) -> LiveResult<TickOutcome> {
        let mut outcome = TickOutcome::default();
        if self.closed {
            return Ok(outcome);
        }
        let Some(t) = self.clock(now) else {
            return Ok(outcome);
        };
        self.elapsed = t;
        self.log_shown(t)?;
        self.lp.advance(t);
        self.lp.release_settled()?;

        if t >= self.config.max_seconds {
            self.close_at(t)?;
            outcome.closed = true;
            return Ok(outcome);
        }

        if self.world.is_game_over() {
            self.world.new_game();
        }
        let features = build_theta(&self.world.observe());
        let theta = features.flat();
        let action = select_action(self.lp.model(), &theta);
        let result = self.world.step(action)?;
        self.shown = Some(Shown { theta, action, start: t, score_delta: result.score_delta });
        self.tick += 1;

        if self.world.is_game_over() {
            let score = self.world.score().points();
            self.games.push(score);
            self.bars.finish_game(score);
            outcome.game_ended = Some(score);
        } else {
            self.bars.set_current(self.world.score().points());
        }
        Ok(outcome)
    }

    fn log_shown(&mut self, t: f64) -> LiveResult<()> {
        if let Some(s) = self.shown.take() {
            let end = t.max(s.start);
            self.lp.record_step(s.theta, s.action, s.start, end, s.score_delta)?;
        }
        Ok(())
    }

    fn close_at(&mut self, t: f64) -> LiveResult<()> {
        self.log_shown(t)?;
        self.lp.flush()?;
        self.closed = true;
        Ok(())
    }

    /// Ends the session early, e.g. when the trainer leaves.
    pub fn close(&mut self, now: f64) -> LiveResult<()> {
        if self.closed {
            return Ok(());
        }
        let t = self.clock(now).unwrap_or(0.0);
        self.elapsed = t;
        self.close_at(t)
    }

    /// The log as it would read if the session ended now. Pending keypresses
    /// are included; the running session is not disturbed.
    pub fn log_snapshot(&self) -> LiveResult<TrainingLog> {
        if self.closed {
            return Ok(self.lp.log().clone());
        }
        let (log, _) = self.lp.clone().finish()?;
        Ok(log)
    }

    pub fn frame(&self) -> Frame {
        let obs = self.world.observe();
        let (entities, mario) = Frame::views(&obs);
        Frame {
            tick: self.tick,
            elapsed: self.elapsed,
            level: obs.level_number,
            origin_col: obs.origin_col,
            tiles: obs.grid.rows().to_vec(),
            entities,
            mario,
            score: self.world.score().points(),
            bars: self.bars.bars(),
            mode: self.mode(),
            started: self.is_started(),
            closed: self.closed,
            leaderboard: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session() -> Session {
        Session::new(1, "ann", SessionFlags::default(), None, SessionConfig::default(), 7).unwrap()
    }

    #[test]
    fn empty_name_is_rejected() {
        assert!(Session::new(1, "  ", SessionFlags::default(), None, SessionConfig::default(), 7).is_err());
    }

    #[test]
    fn starts_in_training_mode_at_zero() {
        let s = session();
        let f = s.frame();
        assert_eq!((f.mode, f.score, f.level, f.tick), (Mode::Training, 0.0, 0, 0));
        assert_eq!(f.bars, vec![0.0]);
        assert!(!f.started);
    }

    #[test]
    fn nothing_happens_before_start() {
        let mut s = session();
        s.tick(1.0).unwrap();
        assert_eq!(s.ticks(), 0);
        assert!(!s.submit_feedback(1, None, 1.0).unwrap());
        s.start(2.0);
        s.tick(2.0).unwrap();
        s.tick(2.05).unwrap();
        assert_eq!(s.ticks(), 2);
        // The step on screen is logged once its interval is over.
        let log = s.log_snapshot().unwrap();
        assert_eq!(log.records.len(), 1);
        assert_eq!(log.records[0].start, 0.0);
        assert_eq!(log.records[0].end, 0.05);
    }

    #[test]
    fn bar_window_clears_when_full() {
        let mut w = BarWindow::new(2);
        w.finish_game(10.0);
        w.set_current(3.0);
        assert_eq!(w.bars(), vec![10.0, 3.0]);
        w.finish_game(20.0);
        assert_eq!(w.bars(), vec![10.0, 20.0, 0.0]);
        w.finish_game(30.0);
        assert_eq!(w.bars(), vec![30.0, 0.0]);
    }

    #[test]
    fn session_closes_at_cap() {
        let config = SessionConfig { max_seconds: 1.0, tick_rate: 10.0, ..SessionConfig::default() };
        let mut s = Session::new(1, "ann", SessionFlags::default(), None, config, 7).unwrap();
        s.start(0.0);
        let mut k = 0;
        loop {
            let out = s.tick(k as f64 * 0.1).unwrap();
            k += 1;
            if out.closed {
                break;
            }
            assert!(k < 20);
        }
        assert!(s.is_closed());
        assert!(s.elapsed() <= 1.0);
        let log = s.log_snapshot().unwrap();
        log.validate().unwrap();
        assert_eq!(log.records.len() as u64, s.ticks());
        assert!(!s.submit_feedback(1, None, 2.0).unwrap());
    }
}
