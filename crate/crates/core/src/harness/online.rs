//! The online learning loop shared by simulated runs and live sessions:
//! steps enter a credit window, keypresses are credited as their time comes,
//! and finalized steps are trained on and written to the log.

use std::collections::VecDeque;

use super::log::{quantize_time, EventRecord, LogHeader, StepRecord, TrainingLog};
use crate::error::Result;
use crate::features::Theta;
use crate::learner::{FeedbackEvent, HumanRewardModel, StepSpan, StepWindow};
use crate::sim::{Action, Score};

#[derive(Clone, Copy, Debug)]
struct Pending {
    event: FeedbackEvent,
    client_time: Option<f64>,
    frozen: bool,
}

/// Owns the model, the credit window and the growing log.
#[derive(Clone, Debug)]
pub struct TrainingLoop {
    model: HumanRewardModel,
    window: StepWindow,
    /// Keypresses whose time has not come yet, ordered by time.
    pending: VecDeque<Pending>,
    /// Log records of steps still in the window.
    open: VecDeque<StepRecord>,
    log: TrainingLog,
    training: bool,
    now: f64,
    updates: u64,
}

impl TrainingLoop {
    pub fn new(model: HumanRewardModel, header: LogHeader) -> Self {
        let window = StepWindow::new(header.pdf);
        Self {
            model,
            window,
            pending: VecDeque::new(),
            open: VecDeque::new(),
            log: TrainingLog::new(header),
            training: true,
            now: 0.0,
            updates: 0,
        }
    }

    pub fn model(&self) -> &HumanRewardModel {
        &self.model
    }

    pub fn log(&self) -> &TrainingLog {
        &self.log
    }

    pub fn is_training(&self) -> bool {
        self.training
    }

    /// Pauses or resumes learning. Paused keypresses are logged but never
    /// credited, and steps finalized while paused are not trained on.
    pub fn set_training(&mut self, training: bool) {
        self.training = training;
    }

    /// Number of model updates so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Steps recorded so far, finalized or not.
    pub fn steps(&self) -> u64 {
        (self.log.records.len() + self.open.len()) as u64
    }

    /// Appends the step shown on screen during `[start, end]`.
    pub fn record_step(&mut self, theta: Theta, action: Action, start: f64, end: f64, score_delta: Score) -> Result<()> {
        let index = self.steps();
        self.window.push(index, theta, action, StepSpan { start, end })?;
        self.open.push_back(StepRecord {
            step: index,
            theta,
            action,
            start: quantize_time(start),
            end: quantize_time(end),
            score_delta: score_delta.points(),
            h: 0.0,
            events: Vec::new(),
            frozen: false,
        });
        self.now = self.now.max(end);
        Ok(())
    }

    /// Queues a keypress; it is credited once the clock reaches its time.
    /// Whether learning is paused is decided now, at the press.
    pub fn press(&mut self, event: FeedbackEvent, client_time: Option<f64>) {
        let entry = Pending { event, client_time, frozen: !self.training };
        let at = self.pending.partition_point(|p| p.event.time <= event.time);
        self.pending.insert(at, entry);
    }

    /// Credits every queued keypress whose time is at or before `now`.
    /// Presses that come before the first step wait for it, so they can be
    /// logged.
    pub fn advance(&mut self, now: f64) {
        self.now = self.now.max(now);
        if self.steps() == 0 {
            return;
        }
        while self.pending.front().is_some_and(|p| p.event.time <= self.now) {
            let p = self.pending.pop_front().expect("checked");
            self.attach(&p);
            if !p.frozen {
                self.window.credit(&p.event);
            }
        }
    }

    fn attach(&mut self, p: &Pending) {
        let record = EventRecord {
            value: p.event.value(),
            time: quantize_time(p.event.time),
            client_time: p.client_time.map(quantize_time),
            frozen: p.frozen,
        };
        let at = self.open.partition_point(|r| r.start <= record.time).saturating_sub(1);
        match self.open.get_mut(at) {
            Some(r) => r.events.push(record),
            None => match self.log.records.last_mut() {
                Some(r) => r.events.push(record),
                None => log::warn!("keypress at t={:.3}s before any step; dropped", p.event.time),
            },
        }
    }

    /// Finalizes steps with index at most `last_index`.
    pub fn release_through(&mut self, last_index: u64) -> Result<()> {
        let released = self.window.release_through(last_index);
        self.finalize(released)
    }

    /// Finalizes steps no keypress after `now` can reach.
    pub fn release_settled(&mut self) -> Result<()> {
        let released = self.window.release_before(self.now);
        self.finalize(released)
    }

    /// Credits all queued keypresses and finalizes every step.
    pub fn flush(&mut self) -> Result<()> {
        if let Some(last) = self.pending.back() {
            let t = last.event.time;
            self.advance(t);
        }
        let released = self.window.release_all();
        self.finalize(released)
    }

    fn finalize(&mut self, released: Vec<crate::learner::WindowStep>) -> Result<()> {
        for step in released {
            let mut record = self.open.pop_front().expect("window and records stay aligned");
            debug_assert_eq!(record.step, step.index);
            if self.training {
                if let Some(sample) = step.sample() {
                    self.model.update(&sample)?;
                    self.updates += 1;
                    record.h = sample.h;
                }
            } else {
                record.frozen = true;
            }
            self.log.records.push(record);
        }
        Ok(())
    }

    /// Flushes and hands back the log and the model.
    pub fn finish(mut self) -> Result<(TrainingLog, HumanRewardModel)> {
        self.flush()?;
        Ok((self.log, self.model))
    }
}
