//! Tile-based platformer with the competition's scoring and the
//! level 0 -> 1 -> 2 -> 0 progression.

mod action;
mod entity;
mod level;
mod score;
mod tile;
mod world;

pub use action::{Action, Direction};
pub use entity::{Entity, EntityKind, EntitySpawn};
pub use level::{
    generate_level, LevelDocument, LevelSet, LevelSpec, DEFAULT_LEVEL_SEED, LEVEL_FORMAT_VERSION, MAX_DIFFICULTY,
};
pub use score::{Score, ScoreEvent};
pub use tile::{TileGrid, TileKind, GROUND_TOP, LEVEL_ROWS, VIEW_COLS};
pub use world::{MarioState, Observation, Outcome, Physics, StepResult, World};
