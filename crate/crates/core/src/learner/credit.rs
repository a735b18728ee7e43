//! Credit assignment for delayed human feedback.
//!
//! A keypress at time `T` is attributed to earlier steps according to a delay
//! density `f`: the step that ran over `[t0, t1]` receives
//! `F(T - t0) - F(T - t1)`, the probability that the trainer's reaction delay
//! points into that step. A step's label is the value-weighted sum of all
//! credits it receives.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::features::Theta;
use crate::rng::SplitMix64;
use crate::sim::Action;

/// Credits and labels smaller than this are floating-point residue and count as zero.
pub const CREDIT_EPSILON: f64 = 1e-12;

/// Uniform density of the trainer's reaction delay, in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PdfRepr", into = "PdfRepr")]
pub struct DelayPdf {
    lo: f64,
    hi: f64,
}

#[derive(Serialize, Deserialize)]
struct PdfRepr {
    family: String,
    lo: f64,
    hi: f64,
}

impl TryFrom<PdfRepr> for DelayPdf {
    type Error = Error;
    fn try_from(r: PdfRepr) -> Result<Self> {
        if r.family != "uniform" {
            return Err(invalid(format!("unknown delay family {:?}", r.family)));
        }
        DelayPdf::uniform(r.lo, r.hi)
    }
}

impl From<DelayPdf> for PdfRepr {
    fn from(p: DelayPdf) -> Self {
        PdfRepr { family: "uniform".into(), lo: p.lo, hi: p.hi }
    }
}

impl Default for DelayPdf {
    fn default() -> Self {
        Self { lo: 0.2, hi: 0.8 }
    }
}

impl DelayPdf {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
            return Err(invalid(format!("delay support [{lo}, {hi}] must satisfy 0 <= lo < hi")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn density(&self, t: f64) -> f64 {
        if (self.lo..=self.hi).contains(&t) {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        ((t - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> f64 {
        rng.uniform(self.lo, self.hi)
    }

    /// Steps that must elapse after a step ends before no further keypress
    /// can credit it, at a fixed tick rate.
    pub fn lag_steps(&self, tick_rate: f64) -> u64 {
        (self.hi * tick_rate - 1e-9).ceil().max(0.0) as u64
    }
}

/// One keypress: `+1` or `-1` at a wall-clock time in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    value: i8,
    pub time: f64,
}

impl FeedbackEvent {
    pub fn new(value: i8, time: f64) -> Result<Self> {
        if value != 1 && value != -1 {
            return Err(invalid(format!("feedback value must be +1 or -1, got {value}")));
        }
        if !time.is_finite() {
            return Err(Error::NonFinite("feedback time"));
        }
        Ok(Self { value, time })
    }

    pub fn positive(time: f64) -> Self {
        Self { value: 1, time }
    }

    pub fn negative(time: f64) -> Self {
        Self { value: -1, time }
    }

    pub fn value(&self) -> i8 {
        self.value
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSpan {
    pub start: f64,
    pub end: f64,
}

pub fn credit_for_span(pdf: &DelayPdf, event_time: f64, span: StepSpan) -> f64 {
    let c = pdf.cdf(event_time - span.start) - pdf.cdf(event_time - span.end);
    if c < CREDIT_EPSILON {
        0.0
    } else {
        c
    }
}

/// Credit of one event for each step of the window, in window order.
pub fn assign_credit(event: &FeedbackEvent, spans: &[StepSpan], pdf: &DelayPdf) -> Vec<f64> {
    if spans.is_empty() {
        log::warn!("feedback at t={:.3}s arrived with no steps to credit; discarded", event.time);
    }
    spans.iter().map(|&s| credit_for_span(pdf, event.time, s)).collect()
}

/// A state-action pair with its aggregated human-reward label.
#[derive(Clone, Debug, PartialEq)]
pub struct CreditedSample {
    pub theta: Theta,
    pub action: Action,
    pub h: f64,
}

/// A step still open to credit.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowStep {
    pub index: u64,
    pub theta: Theta,
    pub action: Action,
    pub span: StepSpan,
    pub h: f64,
}

impl WindowStep {
    pub fn sample(&self) -> Option<CreditedSample> {
        (self.h != 0.0).then(|| CreditedSample { theta: self.theta, action: self.action, h: self.h })
    }
}

fn snap(h: f64) -> f64 {
    if h.abs() < CREDIT_EPSILON {
        0.0
    } else {
        h
    }
}

/// Labels for every step of a window from a batch of events; zero-label
/// steps are left out.
pub fn aggregate_labels(events: &[FeedbackEvent], window: &[WindowStep], pdf: &DelayPdf) -> Vec<CreditedSample> {
    let spans: Vec<StepSpan> = window.iter().map(|s| s.span).collect();
    let mut h = vec![0.0; window.len()];
    for event in events {
        for (slot, c) in h.iter_mut().zip(assign_credit(event, &spans, pdf)) {
            *slot += event.value as f64 * c;
        }
    }
    window
        .iter()
        .zip(h)
        .filter_map(|(s, h)| {
            let h = snap(h);
            (h != 0.0).then(|| CreditedSample { theta: s.theta, action: s.action, h })
        })
        .collect()
}

/// Time-ordered recent steps, accumulating labels as feedback arrives and
/// releasing each step once no later keypress can reach it.
#[derive(Clone, Debug)]
pub struct StepWindow {
    pdf: DelayPdf,
    steps: VecDeque<WindowStep>,
}

impl StepWindow {
    pub fn new(pdf: DelayPdf) -> Self {
        Self { pdf, steps: VecDeque::new() }
    }

    pub fn pdf(&self) -> &DelayPdf {
        &self.pdf
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> impl Iterator<Item = &WindowStep> {
        self.steps.iter()
    }

    pub fn push(&mut self, index: u64, theta: Theta, action: Action, span: StepSpan) -> Result<()> {
        if !(span.start < span.end) {
            return Err(invalid(format!("step span [{}, {}] is empty", span.start, span.end)));
        }
        if let Some(last) = self.steps.back() {
            if span.start < last.span.end || index <= last.index {
                return Err(invalid("steps must be pushed in time order"));
            }
        }
        self.steps.push_back(WindowStep { index, theta, action, span, h: 0.0 });
        Ok(())
    }

    /// Adds the event's credit to every open step; returns the credit handed out.
    pub fn credit(&mut self, event: &FeedbackEvent) -> f64 {
        if self.steps.is_empty() {
            log::warn!("feedback at t={:.3}s arrived with no steps to credit; discarded", event.time);
            return 0.0;
        }
        let mut total = 0.0;
        for step in self.steps.iter_mut() {
            let c = credit_for_span(&self.pdf, event.time, step.span);
            step.h += event.value as f64 * c;
            total += c;
        }
        total
    }

    /// Releases steps with `index <= last_index`, oldest first.
    pub fn release_through(&mut self, last_index: u64) -> Vec<WindowStep> {
        let mut out = Vec::new();
        while self.steps.front().is_some_and(|s| s.index <= last_index) {
            let mut s = self.steps.pop_front().expect("checked");
            s.h = snap(s.h);
            out.push(s);
        }
        out
    }

    /// Releases steps whose end lies at least the delay support's upper edge before `now`.
    pub fn release_before(&mut self, now: f64) -> Vec<WindowStep> {
        let hi = self.pdf.hi;
        let mut out = Vec::new();
        while self.steps.front().is_some_and(|s| s.span.end + hi <= now) {
            let mut s = self.steps.pop_front().expect("checked");
            s.h = snap(s.h);
            out.push(s);
        }
        out
    }

    pub fn release_all(&mut self) -> Vec<WindowStep> {
        self.release_through(u64::MAX)
    }

    /// Forgets all labels accumulated so far without releasing the steps.
    pub fn clear_labels(&mut self) {
        for s in self.steps.iter_mut() {
            s.h = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::THETA_LEN;

    fn spans(n: usize, dt: f64) -> Vec<StepSpan> {
        (0..n).map(|i| StepSpan { start: i as f64 * dt, end: (i + 1) as f64 * dt }).collect()
    }

    fn step(index: u64, start: f64, end: f64) -> WindowStep {
        WindowStep {
            index,
            theta: [0.0; THETA_LEN],
            action: Action::from_index(0).unwrap(),
            span: StepSpan { start, end },
            h: 0.0,
        }
    }

    #[test]
    fn whole_support_inside_one_step() {
        let pdf = DelayPdf::default();
        let window = [StepSpan { start: 0.0, end: 1.0 }, StepSpan { start: 1.0, end: 2.0 }];
        // Event 0.9 s after the first step began: delays 0.2..0.8 all land in it.
        let c = assign_credit(&FeedbackEvent::positive(1.0 + 0.0), &window, &pdf);
        assert_eq!(c, vec![1.0, 0.0]);
    }

    #[test]
    fn six_tenth_second_steps_share_equally() {
        let pdf = DelayPdf::default();
        let window = spans(20, 0.1);
        let t = 2.0;
        let c = assign_credit(&FeedbackEvent::positive(t), &window, &pdf);
        for (span, credit) in window.iter().zip(&c) {
            let before = t - span.end;
            let expected = if before >= 0.2 - 1e-9 && before <= 0.7 + 1e-9 { 1.0 / 6.0 } else { 0.0 };
            assert!((credit - expected).abs() < 1e-9, "span {span:?}: {credit} vs {expected}");
        }
        assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_covered_step_gets_covered_mass() {
        let pdf = DelayPdf::uniform(0.2, 0.8).unwrap();
        // Delays into this step range over [0.75, 0.85]; half of that is inside the support.
        let c = credit_for_span(&pdf, 1.0, StepSpan { start: 0.15, end: 0.25 });
        assert!((c - 0.05 / 0.6).abs() < 1e-12);
    }

    #[test]
    fn empty_window_credits_nothing() {
        assert!(assign_credit(&FeedbackEvent::positive(1.0), &[], &DelayPdf::default()).is_empty());
        let mut w = StepWindow::new(DelayPdf::default());
        assert_eq!(w.credit(&FeedbackEvent::positive(1.0)), 0.0);
    }

    #[test]
    fn single_full_credit_gives_unit_label() {
        let pdf = DelayPdf::uniform(0.0, 1.0).unwrap();
        let s = aggregate_labels(&[FeedbackEvent::positive(1.0)], &[step(0, 0.0, 1.0)], &pdf);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].h, 1.0);
    }

    #[test]
    fn opposite_half_credits_cancel_and_are_omitted() {
        let pdf = DelayPdf::uniform(0.0, 1.0).unwrap();
        let window = [step(0, 0.0, 0.5), step(1, 0.5, 1.0)];
        let events = [FeedbackEvent::positive(1.0), FeedbackEvent::negative(1.0)];
        assert!(aggregate_labels(&events, &window, &pdf).is_empty());
    }

    #[test]
    fn one_sixth_plus_one_third_is_one_half() {
        let pdf = DelayPdf::default();
        let target = [step(0, 0.0, 0.2)];
        // Delays [0.7, 0.9] -> 1/6 and [0.4, 0.6] -> 1/3.
        let s = aggregate_labels(&[FeedbackEvent::positive(0.9), FeedbackEvent::positive(0.6)], &target, &pdf);
        assert!((s[0].h - 0.5).abs() < 1e-12);
    }

    #[test]
    fn window_releases_by_index_and_time() {
        let mut w = StepWindow::new(DelayPdf::uniform(0.0, 0.25).unwrap());
        let theta = [0.0; THETA_LEN];
        let a = Action::from_index(9).unwrap();
        for i in 0..4u64 {
            w.push(i, theta, a, StepSpan { start: i as f64 * 0.1, end: (i + 1) as f64 * 0.1 }).unwrap();
        }
        assert!(w.push(2, theta, a, StepSpan { start: 0.4, end: 0.5 }).is_err());
        w.credit(&FeedbackEvent::positive(0.35));
        assert_eq!(w.release_before(0.36).len(), 1);
        let rest = w.release_through(2);
        assert_eq!(rest.iter().map(|s| s.index).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(w.release_all().len(), 1);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(FeedbackEvent::new(0, 1.0).is_err());
        assert!(FeedbackEvent::new(2, 1.0).is_err());
        assert!(DelayPdf::uniform(0.5, 0.5).is_err());
        assert!(DelayPdf::uniform(-0.1, 0.5).is_err());
    }

    #[test]
    fn lag_covers_support() {
        let pdf = DelayPdf::default();
        assert_eq!(pdf.lag_steps(24.0), 20);
        assert_eq!(pdf.lag_steps(10.0), 8);
    }
}
