use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Game score held in hundredths of a point so the per-step penalty
/// accumulates exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Score(pub i64);

impl Score {
    pub const ZERO: Score = Score(0);

    pub fn hundredths(self) -> i64 {
        self.0
    }

    pub fn points(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl Add for Score {
    type Output = Score;
    fn add(self, rhs: Score) -> Score {
        Score(self.0 + rhs.0)
    }
}

impl AddAssign for Score {
    fn add_assign(&mut self, rhs: Score) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Score {
    fn sum<I: Iterator<Item = Score>>(iter: I) -> Score {
        Score(iter.map(|s| s.0).sum())
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.points())
    }
}

/// Competition scoring: kill +1, coin +1, finish +100, die -10, step -0.01.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreEvent {
    Kill,
    Coin,
    FinishLevel,
    Die,
    Step,
}

impl ScoreEvent {
    pub fn value(self) -> Score {
        Score(match self {
            ScoreEvent::Kill => 100,
            ScoreEvent::Coin => 100,
            ScoreEvent::FinishLevel => 10_000,
            ScoreEvent::Die => -1_000,
            ScoreEvent::Step => -1,
        })
    }
}
