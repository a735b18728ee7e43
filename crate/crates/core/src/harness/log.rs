//! Training logs as JSON lines: one header line, then one line per step.
//! Times are written as decimal strings with six places.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::Theta;
use crate::learner::{credit_for_span, DelayPdf, StepSpan, CREDIT_EPSILON};
use crate::sim::Action;

pub const LOG_FORMAT: &str = "tamer-training-log";
pub const LOG_VERSION: u32 = 1;

/// Rounds a time to what survives a trip through the log.
pub fn quantize_time(t: f64) -> f64 {
    format!("{t:.6}").parse().expect("formatted float parses")
}

mod seconds {
    use super::*;

    pub fn serialize<S: Serializer>(t: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{t:.6}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(t: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match t {
                Some(t) => s.serialize_some(&format!("{t:.6}")),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            let text: Option<String> = Option::deserialize(d)?;
            text.map(|t| t.parse().map_err(serde::de::Error::custom)).transpose()
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogSource {
    #[default]
    Simulated,
    Live,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub version: u32,
    pub source: LogSource,
    pub env_seed: u64,
    pub level_seed: u64,
    /// Steps per second.
    pub tick_rate: f64,
    pub pdf: DelayPdf,
    /// Condition tags, e.g. trainer profile or session flags.
    #[serde(default)]
    pub tags: BTreeMap<String, String>,
}

impl LogHeader {
    pub fn new(source: LogSource, env_seed: u64, level_seed: u64, tick_rate: f64, pdf: DelayPdf) -> Self {
        Self {
            format: LOG_FORMAT.into(),
            version: LOG_VERSION,
            source,
            env_seed,
            level_seed,
            tick_rate,
            pdf,
            tags: BTreeMap::new(),
        }
    }
}

/// A keypress as logged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub value: i8,
    /// Time the press was registered, in seconds.
    #[serde(with = "seconds")]
    pub time: f64,
    /// Time reported by the client, kept for audit only.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "seconds::option")]
    pub client_time: Option<f64>,
    /// Pressed while learning was paused; never credited.
    #[serde(default, skip_serializing_if = "is_false")]
    pub frozen: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub theta: Theta,
    pub action: Action,
    #[serde(with = "seconds")]
    pub start: f64,
    #[serde(with = "seconds")]
    pub end: f64,
    /// Game score change during the step, in points.
    pub score_delta: f64,
    /// Label the learner trained on for this step; 0 when none.
    pub h: f64,
    /// Keypresses registered while this step was on screen.
    pub events: Vec<EventRecord>,
    /// Finalized while learning was paused, so never trained on.
    #[serde(default, skip_serializing_if = "is_false")]
    pub frozen: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingLog {
    pub header: LogHeader,
    pub records: Vec<StepRecord>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedLog(msg.into())
}

impl TrainingLog {
    pub fn new(header: LogHeader) -> Self {
        Self { header, records: Vec::new() }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().ok_or_else(|| malformed("empty log"))?;
        let header: LogHeader = serde_json::from_str(first)?;
        if header.format != LOG_FORMAT || header.version != LOG_VERSION {
            return Err(malformed(format!("unsupported log {} v{}", header.format, header.version)));
        }
        let records = lines.map(serde_json::from_str).collect::<Result<Vec<StepRecord>, _>>()?;
        let log = Self { header, records };
        log.validate()?;
        Ok(log)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_jsonl(&fs::read_to_string(path)?)
    }

    /// Hex SHA-256 of the JSONL text.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    pub fn labeled_steps(&self) -> Vec<u64> {
        self.records.iter().filter(|r| r.h != 0.0).map(|r| r.step).collect()
    }

    pub fn event_count(&self) -> usize {
        self.records.iter().map(|r| r.events.len()).sum()
    }

    /// Structural checks: consecutive step indices, increasing contiguous
    /// times, finite features and labels, keypress values of one unit.
    pub fn validate(&self) -> Result<()> {
        if !(self.header.tick_rate > 0.0 && self.header.tick_rate.is_finite()) {
            return Err(malformed("tick rate must be positive"));
        }
        let mut prev: Option<&StepRecord> = None;
        for r in &self.records {
            if let Some(p) = prev {
                if r.step != p.step + 1 {
                    return Err(malformed(format!("step {} follows step {}", r.step, p.step)));
                }
                if r.start != p.end {
                    return Err(malformed(format!("step {} does not start where step {} ended", r.step, p.step)));
                }
            }
            if r.end <= r.start {
                return Err(malformed(format!("step {} has non-increasing times", r.step)));
            }
            if !r.h.is_finite() || r.theta.iter().any(|v| !v.is_finite()) {
                return Err(malformed(format!("step {} holds a non-finite value", r.step)));
            }
            if r.events.iter().any(|e| e.value != 1 && e.value != -1) {
                return Err(malformed(format!("step {} holds a keypress other than +1/-1", r.step)));
            }
            prev = Some(r);
        }
        Ok(())
    }

    /// Recomputes every non-frozen step's label from the logged keypresses and
    /// returns the largest disagreement with the recorded labels.
    pub fn label_discrepancy(&self) -> f64 {
        let pdf = self.header.pdf;
        let spans: Vec<StepSpan> = self.records.iter().map(|r| StepSpan { start: r.start, end: r.end }).collect();
        let mut h = vec![0.0; self.records.len()];
        for e in self.records.iter().flat_map(|r| &r.events).filter(|e| !e.frozen) {
            // Only steps ending within the delay support can be credited.
            let first = spans.partition_point(|s| s.end < e.time - pdf.hi());
            let last = spans.partition_point(|s| s.start <= e.time - pdf.lo());
            for (i, span) in spans.iter().enumerate().take(last).skip(first) {
                let c = credit_for_span(&pdf, e.time, *span);
                if c >= CREDIT_EPSILON {
                    h[i] += e.value as f64 * c;
                }
            }
        }
        self.records
            .iter()
            .zip(&h)
            .filter(|(r, _)| !r.frozen)
            .map(|(r, x)| (r.h - if x.abs() < CREDIT_EPSILON { 0.0 } else { *x }).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: u64, h: f64) -> StepRecord {
        StepRecord {
            step,
            theta: [0.25; crate::features::THETA_LEN],
            action: Action::from_index(9).unwrap(),
            start: quantize_time(step as f64 / 24.0),
            end: quantize_time((step + 1) as f64 / 24.0),
            score_delta: -0.01,
            h,
            events: Vec::new(),
            frozen: false,
        }
    }

    fn sample_log() -> TrainingLog {
        let mut log = TrainingLog::new(LogHeader::new(LogSource::Simulated, 4, 121, 24.0, DelayPdf::default()));
        for i in 0..5 {
            log.records.push(record(i, if i == 2 { 0.5 } else { 0.0 }));
        }
        log.records[3].events.push(EventRecord { value: 1, time: 0.15, client_time: Some(0.149), frozen: false });
        log
    }

    #[test]
    fn jsonl_round_trip() {
        let log = sample_log();
        let text = log.to_jsonl();
        assert_eq!(text.lines().count(), 6);
        assert!(text.contains("\"start\":\"0.041667\""));
        let back = TrainingLog::from_jsonl(&text).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.hash(), log.hash());
        assert_eq!(back.labeled_steps(), vec![2]);
    }

    #[test]
    fn gaps_and_bad_values_rejected() {
        let mut log = sample_log();
        log.records.remove(2);
        assert!(matches!(TrainingLog::from_jsonl(&log.to_jsonl()), Err(Error::MalformedLog(_))));
        let mut log = sample_log();
        log.records[1].events.push(EventRecord { value: 2, time: 0.1, client_time: None, frozen: false });
        assert!(log.validate().is_err());
        assert!(TrainingLog::from_jsonl("").is_err());
    }
}
