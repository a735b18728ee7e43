//! State representation: the two most salient objects near Mario plus
//! Mario's own motion, flattened into 23 numbers.
//!
//! Layout of the flat vector:
//!
//! ```text
//! [0..10)   first salient object:  is_pit is_enemy is_mushroom is_flower is_coin
//!                                   is_smashable is_question dx dy dist
//! [10..20)  second salient object, same layout
//! [20..23)  right_of_wall x_speed y_speed
//! ```
//!
//! Offsets are measured from Mario's centre to the object's centre in tiles,
//! `dx` positive to the right and `dy` positive upwards. An empty slot holds
//! no flags, zero offsets and the largest distance the region allows.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::sim::{EntityKind, Observation, TileKind};

pub const THETA_LEN: usize = 23;
pub const SALIENT_LEN: usize = 10;
pub const CLASS_FLAGS: usize = 7;
/// Distance stored in an empty salient slot: the diagonal of the 8x8 region.
pub const SENTINEL_DIST: f64 = 11.313_708_498_984_761;

/// Region around Mario's tile, in tiles: 3 behind and 4 ahead, 3 below and 4 above.
const REGION_BEHIND: i64 = 3;
const REGION_AHEAD: i64 = 4;
const REGION_BELOW: i64 = 3;
const REGION_ABOVE: i64 = 4;

pub type Theta = [f64; THETA_LEN];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SalientClass {
    Pit,
    Enemy,
    Mushroom,
    Flower,
    Coin,
    SmashableBlock,
    QuestionBlock,
}

impl SalientClass {
    /// Ranking tier: pits first, then entities, then tile objects.
    pub fn tier(self) -> u8 {
        match self {
            SalientClass::Pit => 0,
            SalientClass::Enemy | SalientClass::Mushroom | SalientClass::Flower => 1,
            SalientClass::Coin | SalientClass::SmashableBlock | SalientClass::QuestionBlock => 2,
        }
    }

    pub fn flag_index(self) -> usize {
        self as usize
    }

    fn of_tile(kind: TileKind) -> Option<Self> {
        match kind {
            TileKind::PitMarker => Some(SalientClass::Pit),
            TileKind::Coin => Some(SalientClass::Coin),
            TileKind::Brick => Some(SalientClass::SmashableBlock),
            TileKind::Question | TileKind::MushroomSpawner | TileKind::FlowerSpawner => {
                Some(SalientClass::QuestionBlock)
            }
            _ => None,
        }
    }

    fn of_entity(kind: EntityKind) -> Option<Self> {
        match kind {
            // Fireballs are ranked as entities and flagged as enemies.
            EntityKind::MonsterWalker | EntityKind::MonsterShell | EntityKind::Fireball => Some(SalientClass::Enemy),
            EntityKind::Mushroom => Some(SalientClass::Mushroom),
            EntityKind::Flower => Some(SalientClass::Flower),
            EntityKind::CoinPickup => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SalientFeature {
    /// `None` for an empty slot.
    pub class: Option<SalientClass>,
    pub dx: f64,
    pub dy: f64,
    pub dist: f64,
}

impl SalientFeature {
    pub fn new(class: SalientClass, dx: f64, dy: f64) -> Self {
        Self { class: Some(class), dx, dy, dist: dx.hypot(dy) }
    }

    pub fn sentinel() -> Self {
        Self { class: None, dx: 0.0, dy: 0.0, dist: SENTINEL_DIST }
    }

    pub fn to_array(&self) -> [f64; SALIENT_LEN] {
        let mut out = [0.0; SALIENT_LEN];
        if let Some(class) = self.class {
            out[class.flag_index()] = 1.0;
        }
        out[CLASS_FLAGS] = self.dx;
        out[CLASS_FLAGS + 1] = self.dy;
        out[CLASS_FLAGS + 2] = self.dist;
        out
    }

    fn rank_key_cmp(&self, other: &Self) -> Ordering {
        let tier = |f: &Self| f.class.map_or(u8::MAX, SalientClass::tier);
        let flag = |f: &Self| f.class.map_or(usize::MAX, SalientClass::flag_index);
        tier(self)
            .cmp(&tier(other))
            .then(self.dist.total_cmp(&other.dist))
            .then(self.dx.abs().total_cmp(&other.dx.abs()))
            .then(self.dy.abs().total_cmp(&other.dy.abs()))
            .then(self.dx.total_cmp(&other.dx))
            .then(self.dy.total_cmp(&other.dy))
            .then(flag(self).cmp(&flag(other)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarioFeatures {
    pub right_of_wall: bool,
    pub x_speed: f64,
    pub y_speed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub phi1: SalientFeature,
    pub phi2: SalientFeature,
    pub phi_m: MarioFeatures,
}

impl FeatureVector {
    pub fn flat(&self) -> Theta {
        let mut out = [0.0; THETA_LEN];
        out[..SALIENT_LEN].copy_from_slice(&self.phi1.to_array());
        out[SALIENT_LEN..2 * SALIENT_LEN].copy_from_slice(&self.phi2.to_array());
        out[20] = if self.phi_m.right_of_wall { 1.0 } else { 0.0 };
        out[21] = self.phi_m.x_speed;
        out[22] = self.phi_m.y_speed;
        out
    }
}

/// Sorts candidates into salience order. The comparison is a total order, so
/// the result does not depend on the input order.
pub fn rank_candidates(mut candidates: Vec<SalientFeature>) -> Vec<SalientFeature> {
    candidates.sort_by(SalientFeature::rank_key_cmp);
    candidates
}

/// All salient objects in the region around Mario, most salient first.
pub fn rank_salient(obs: &Observation) -> Vec<SalientFeature> {
    let m = &obs.mario;
    let (mx, my) = (m.x + 0.5, m.y + 0.5);
    let (cx, cy) = (mx.floor() as i64, my.floor() as i64);
    let cols = cx - REGION_BEHIND..=cx + REGION_AHEAD;
    let rows = cy - REGION_BELOW..=cy + REGION_ABOVE;

    let mut candidates = Vec::new();
    for col in cols.clone() {
        for row in rows.clone() {
            if let Some(class) = SalientClass::of_tile(obs.tile(col, row)) {
                candidates.push(SalientFeature::new(class, col as f64 + 0.5 - mx, row as f64 + 0.5 - my));
            }
        }
    }
    for e in &obs.entities {
        let Some(class) = SalientClass::of_entity(e.kind) else { continue };
        let (ex, ey) = e.center();
        let in_cols = ex >= *cols.start() as f64 && ex < (*cols.end() + 1) as f64;
        let in_rows = ey >= *rows.start() as f64 && ey < (*rows.end() + 1) as f64;
        if in_cols && in_rows {
            candidates.push(SalientFeature::new(class, ex - mx, ey - my));
        }
    }
    rank_candidates(candidates)
}

pub fn build_theta(obs: &Observation) -> FeatureVector {
    let ranked = rank_salient(obs);
    let slot = |i: usize| ranked.get(i).copied().unwrap_or_else(SalientFeature::sentinel);
    FeatureVector {
        phi1: slot(0),
        phi2: slot(1),
        phi_m: MarioFeatures {
            right_of_wall: obs.mario.right_of_wall,
            x_speed: obs.mario.vx,
            y_speed: obs.mario.vy,
        },
    }
}
