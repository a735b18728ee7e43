use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Left,
    None,
    Right,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Left => -1.0,
            Direction::None => 0.0,
            Direction::Right => 1.0,
        }
    }
}

/// One of the 12 combined button states. Indices are direction-major, then
/// jump, then sprint: `index = 4 * direction + 2 * jump + sprint`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub direction: Direction,
    pub jump: bool,
    pub sprint: bool,
}

impl Action {
    pub const COUNT: usize = 12;

    pub const fn new(direction: Direction, jump: bool, sprint: bool) -> Self {
        Self { direction, jump, sprint }
    }

    pub fn index(self) -> usize {
        let dir = match self.direction {
            Direction::Left => 0,
            Direction::None => 1,
            Direction::Right => 2,
        };
        dir * 4 + (self.jump as usize) * 2 + self.sprint as usize
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index >= Self::COUNT {
            return Err(invalid(format!("action index {index} out of range 0..12")));
        }
        let direction = match index / 4 {
            0 => Direction::Left,
            1 => Direction::None,
            _ => Direction::Right,
        };
        Ok(Self::new(direction, index & 2 != 0, index & 1 != 0))
    }

    pub fn all() -> impl Iterator<Item = Action> {
        (0..Self::COUNT).map(|i| Self::from_index(i).expect("in range"))
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.index() as u8)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let idx = u8::deserialize(d)?;
        Action::from_index(idx as usize).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trips_for_all_twelve() {
        let all: Vec<_> = Action::all().collect();
        assert_eq!(all.len(), 12);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.index(), i);
        }
        assert_eq!(Action::new(Direction::Right, false, true).index(), 9);
        assert!(Action::from_index(12).is_err());
    }
}
