//! Feedback channels: ways of rewriting the labels of a recorded training log
//! before it is replayed. The keypress channel keeps the weighted labels, the
//! others keep only a sign, possibly corrupted or replaced by a coin flip.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harness::log::TrainingLog;
use crate::rng::SplitMix64;

/// Per-class accuracies of the facial-expression predictors, as
/// `(name, p_pos, p_neg)`.
pub const PRESETS: [(&str, f64, f64); 4] = [
    ("facial-uninformed", 0.62, 0.69),
    ("facial-competitive-uninformed", 0.65, 0.73),
    ("facial-informed", 0.75, 0.70),
    ("facial-competitive", 0.79, 0.75),
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelSpec {
    /// The weighted labels as recorded.
    Keypress,
    /// Sign of each label.
    Binary,
    /// Sign of each label, kept with per-class probabilities.
    Noisy { p_pos: f64, p_neg: f64, seed: u64 },
    /// A fair coin per label.
    Random { seed: u64 },
}

impl ChannelSpec {
    pub fn noisy(p_pos: f64, p_neg: f64, seed: u64) -> Result<Self> {
        let spec = Self::Noisy { p_pos, p_neg, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        let (_, p_pos, p_neg) = PRESETS
            .iter()
            .find(|(n, _, _)| *n == name)
            .ok_or_else(|| invalid(format!("unknown channel preset {name:?}")))?;
        Self::noisy(*p_pos, *p_neg, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::Noisy { p_pos, p_neg, .. } = *self {
            for p in [p_pos, p_neg] {
                if !(0.5..=1.0).contains(&p) {
                    return Err(invalid(format!("channel accuracy {p} outside [0.5, 1]")));
                }
            }
        }
        Ok(())
    }

    fn seed(&self) -> u64 {
        match *self {
            Self::Noisy { seed, .. } | Self::Random { seed } => seed,
            Self::Keypress | Self::Binary => 0,
        }
    }

    /// Short label for reports, without the seed.
    pub fn label(&self) -> String {
        match *self {
            Self::Keypress => "keypress".into(),
            Self::Binary => "binary".into(),
            Self::Noisy { p_pos, p_neg, .. } if p_pos == p_neg => format!("noisy({p_pos})"),
            Self::Noisy { p_pos, p_neg, .. } => format!("noisy({p_pos},{p_neg})"),
            Self::Random { .. } => "random".into(),
        }
    }
}

/// Writes specs as `keypress`, `binary`, `random:seed=3` or
/// `noisy:ppos=0.79,pneg=0.75,seed=7`; parsing accepts the same plus
/// `noisy:p=0.66,seed=1` and `preset:<name>,seed=1`.
impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Keypress => write!(f, "keypress"),
            Self::Binary => write!(f, "binary"),
            Self::Noisy { p_pos, p_neg, seed } => write!(f, "noisy:ppos={p_pos},pneg={p_neg},seed={seed}"),
            Self::Random { seed } => write!(f, "random:seed={seed}"),
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut p_pos = None;
        let mut p_neg = None;
        let mut seed = 0u64;
        let mut preset = None;
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || invalid(format!("bad channel parameter {part:?} in {s:?}"));
            match part.split_once('=') {
                Some(("ppos", v)) => p_pos = Some(v.parse::<f64>().map_err(|_| bad())?),
                Some(("pneg", v)) => p_neg = Some(v.parse::<f64>().map_err(|_| bad())?),
                Some(("p", v)) => {
                    let p = v.parse::<f64>().map_err(|_| bad())?;
                    p_pos = Some(p);
                    p_neg = Some(p);
                }
                Some(("seed", v)) => seed = v.parse().map_err(|_| bad())?,
                None if kind == "preset" && preset.is_none() => preset = Some(part),
                _ => return Err(bad()),
            }
        }
        let spec = match kind {
            "keypress" => Self::Keypress,
            "binary" => Self::Binary,
            "random" => Self::Random { seed },
            "noisy" => match (p_pos, p_neg) {
                (Some(p_pos), Some(p_neg)) => Self::Noisy { p_pos, p_neg, seed },
                _ => return Err(invalid(format!("noisy channel needs ppos and pneg: {s:?}"))),
            },
            "preset" => return Self::preset(preset.unwrap_or(""), seed),
            other => return Err(invalid(format!("unknown channel kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Sign of a nonzero label.
pub fn to_binary(h: f64) -> Result<f64> {
    if h == 0.0 || !h.is_finite() {
        return Err(invalid(format!("cannot binarize label {h}")));
    }
    Ok(h.signum())
}

/// Keeps a `+1` with probability `p_pos` and a `-1` with probability `p_neg`,
/// flipping it otherwise.
pub fn corrupt(label: f64, p_pos: f64, p_neg: f64, rng: &mut SplitMix64) -> f64 {
    let keep = if label > 0.0 { p_pos } else { p_neg };
    if rng.chance(keep) {
        label
    } else {
        -label
    }
}

pub fn random_label(rng: &mut SplitMix64) -> f64 {
    if rng.chance(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// One label through a channel. The generator is only consulted by the noisy
/// and random channels, once per label.
pub fn apply(spec: &ChannelSpec, h: f64, rng: &mut SplitMix64) -> Result<f64> {
    Ok(match *spec {
        ChannelSpec::Keypress => h,
        ChannelSpec::Binary => to_binary(h)?,
        ChannelSpec::Noisy { p_pos, p_neg, .. } => corrupt(to_binary(h)?, p_pos, p_neg, rng),
        ChannelSpec::Random { .. } => random_label(rng),
    })
}

/// Rewrites every labeled step of `log`; unlabeled steps are left alone. The
/// random stream depends on the channel seed and the log's environment seed.
pub fn relabel_log(log: &TrainingLog, spec: &ChannelSpec) -> Result<TrainingLog> {
    spec.validate()?;
    if *spec == ChannelSpec::Keypress {
        return Ok(log.clone());
    }
    let mut rng = SplitMix64::derive(spec.seed(), log.header.env_seed);
    let mut out = log.clone();
    for record in out.records.iter_mut().filter(|r| r.h != 0.0) {
        record.h = apply(spec, record.h, &mut rng)?;
    }
    Ok(out)
}
