use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityKind {
    MonsterWalker,
    MonsterShell,
    Fireball,
    Mushroom,
    Flower,
    CoinPickup,
}

impl EntityKind {
    /// Touching it from the side kills Mario.
    pub fn is_hostile(self) -> bool {
        matches!(self, EntityKind::MonsterWalker | EntityKind::MonsterShell | EntityKind::Fireball)
    }

    pub fn is_stompable(self) -> bool {
        matches!(self, EntityKind::MonsterWalker | EntityKind::MonsterShell)
    }
}

/// Positions are the bottom-left corner in tile units, `y` pointing up.
/// Every entity occupies a one-tile box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub kind: EntityKind,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub alive: bool,
    /// Monsters stay frozen until Mario comes within activation range.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub active: bool,
    /// Remaining lifetime in steps for short-lived pickups; 0 means unlimited.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub ttl: u32,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

impl Entity {
    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5, self.y + 0.5)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntitySpawn {
    pub kind: EntityKind,
    pub x: f64,
    pub y: f64,
}
