//! Level layouts and the seeded idiom assembler that produces them.
//!
//! A level is a sequence of idioms (flat stretch, wall or pipe, coin run,
//! block cluster, pit) drawn from a [`SplitMix64`] seeded with the level seed.
//! Every segment consumes the same six draws whatever the difficulty, so the
//! three difficulties of one seed share their skeleton: difficulty only
//! raises walls, adds and hardens monsters, lengthens flat stretches and
//! inserts pits.

use serde::{Deserialize, Serialize};

use super::entity::{EntityKind, EntitySpawn};
use super::tile::{TileKind, GROUND_TOP, LEVEL_ROWS, VIEW_COLS};
use crate::error::{invalid, Error, Result};
use crate::rng::SplitMix64;

pub const LEVEL_FORMAT_VERSION: u32 = 1;
pub const MAX_DIFFICULTY: u8 = 2;
/// Level 0 of the study: seed 121, difficulty 0. Levels 1 and 2 reuse the seed.
pub const DEFAULT_LEVEL_SEED: u64 = 121;

const START_FLAT: usize = 10;
const END_FLAT: usize = 10;
const SEGMENTS: usize = 10;
const BLOCK_ROW: usize = 6;
const SPAWN_X: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSpec {
    pub seed: u64,
    pub difficulty: u8,
    length: usize,
    /// Column-major: `tiles[col * LEVEL_ROWS + row]`, row 0 at the bottom.
    tiles: Vec<TileKind>,
    pub spawns: Vec<EntitySpawn>,
    pub spawn_x: f64,
    pub finish_col: usize,
}

impl LevelSpec {
    /// A flat level of `length` columns with the finish marker near the end.
    /// Mostly useful for building hand-made scenarios.
    pub fn flat(length: usize) -> Self {
        let length = length.max(VIEW_COLS);
        let mut b = Builder::default();
        b.flat(length);
        b.finish(0, 0)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn tile(&self, col: i64, row: i64) -> TileKind {
        if col < 0 || row < 0 || col as usize >= self.length || row as usize >= LEVEL_ROWS {
            return TileKind::Empty;
        }
        self.tiles[col as usize * LEVEL_ROWS + row as usize]
    }

    pub fn set_tile(&mut self, col: usize, row: usize, kind: TileKind) {
        assert!(col < self.length && row < LEVEL_ROWS, "tile ({col},{row}) outside level");
        self.tiles[col * LEVEL_ROWS + row] = kind;
    }

    pub fn tiles(&self) -> &[TileKind] {
        &self.tiles
    }

    pub(crate) fn into_tiles(self) -> Vec<TileKind> {
        self.tiles
    }

    /// A pit column has no ground under it; adjacent pit columns count once.
    pub fn pit_count(&self) -> usize {
        let mut count = 0;
        let mut in_pit = false;
        for col in 0..self.length as i64 {
            let is_pit = self.tile(col, 0) == TileKind::PitMarker;
            if is_pit && !in_pit {
                count += 1;
            }
            in_pit = is_pit;
        }
        count
    }

    pub fn monster_count(&self) -> usize {
        self.spawns.iter().filter(|s| s.kind.is_hostile()).count()
    }

    pub fn to_document(&self) -> LevelDocument {
        let rows = (0..LEVEL_ROWS)
            .rev()
            .map(|row| (0..self.length).map(|col| self.tile(col as i64, row as i64).code()).collect())
            .collect();
        LevelDocument {
            version: LEVEL_FORMAT_VERSION,
            seed: self.seed,
            difficulty: self.difficulty,
            length: self.length,
            spawn_x: self.spawn_x,
            finish_col: self.finish_col,
            rows,
            entities: self.spawns.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LevelDocument = serde_json::from_str(text)?;
        Self::try_from(doc)
    }
}

/// Versioned, serializable form of a level: tile rows top-to-bottom as code
/// arrays plus the entity spawn list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelDocument {
    pub version: u32,
    pub seed: u64,
    pub difficulty: u8,
    pub length: usize,
    pub spawn_x: f64,
    pub finish_col: usize,
    pub rows: Vec<Vec<u8>>,
    pub entities: Vec<EntitySpawn>,
}

impl TryFrom<LevelDocument> for LevelSpec {
    type Error = Error;

    fn try_from(doc: LevelDocument) -> Result<Self> {
        if doc.version != LEVEL_FORMAT_VERSION {
            return Err(invalid(format!("unsupported level version {}", doc.version)));
        }
        if doc.rows.len() != LEVEL_ROWS || doc.rows.iter().any(|r| r.len() != doc.length) {
            return Err(invalid("level rows do not match the declared size"));
        }
        let mut tiles = vec![TileKind::Empty; doc.length * LEVEL_ROWS];
        for (top_index, row) in doc.rows.iter().enumerate() {
            let world_row = LEVEL_ROWS - 1 - top_index;
            for (col, &code) in row.iter().enumerate() {
                tiles[col * LEVEL_ROWS + world_row] =
                    TileKind::from_code(code).ok_or_else(|| invalid(format!("tile code {code} out of range")))?;
            }
        }
        Ok(LevelSpec {
            seed: doc.seed,
            difficulty: doc.difficulty,
            length: doc.length,
            tiles,
            spawns: doc.entities,
            spawn_x: doc.spawn_x,
            finish_col: doc.finish_col,
        })
    }
}

/// The three levels of one game: difficulty 0, 1 and 2 of the same seed.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSet {
    levels: [LevelSpec; 3],
}

impl LevelSet {
    pub fn generate(seed: u64) -> Self {
        let gen = |d| generate_level(seed, d).expect("difficulty in range");
        Self { levels: [gen(0), gen(1), gen(2)] }
    }

    pub fn from_levels(levels: [LevelSpec; 3]) -> Self {
        Self { levels }
    }

    /// The same layout for every level number.
    pub fn repeat(level: LevelSpec) -> Self {
        Self { levels: [level.clone(), level.clone(), level] }
    }

    pub fn get(&self, level_number: u8) -> &LevelSpec {
        &self.levels[level_number as usize]
    }
}

#[derive(Default)]
struct Builder {
    cols: Vec<[TileKind; LEVEL_ROWS]>,
    spawns: Vec<EntitySpawn>,
}

impl Builder {
    fn ground_column() -> [TileKind; LEVEL_ROWS] {
        let mut col = [TileKind::Empty; LEVEL_ROWS];
        for cell in col.iter_mut().take(GROUND_TOP) {
            *cell = TileKind::Ground;
        }
        col
    }

    fn len(&self) -> usize {
        self.cols.len()
    }

    fn flat(&mut self, n: usize) {
        for _ in 0..n {
            self.cols.push(Self::ground_column());
        }
    }

    fn pit(&mut self, width: usize) {
        for _ in 0..width {
            let mut col = [TileKind::Empty; LEVEL_ROWS];
            col[0] = TileKind::PitMarker;
            self.cols.push(col);
        }
    }

    fn wall(&mut self, height: usize, kind: TileKind, width: usize) {
        for _ in 0..width {
            let mut col = Self::ground_column();
            for cell in col.iter_mut().skip(GROUND_TOP).take(height) {
                *cell = kind;
            }
            self.cols.push(col);
        }
    }

    fn set(&mut self, col: usize, row: usize, kind: TileKind) {
        self.cols[col][row] = kind;
    }

    fn monster(&mut self, col: usize, kind: EntityKind) {
        self.spawns.push(EntitySpawn { kind, x: col as f64, y: GROUND_TOP as f64 });
    }

    fn finish(mut self, seed: u64, difficulty: u8) -> LevelSpec {
        let length = self.cols.len();
        let finish_col = length - 5;
        for row in GROUND_TOP..GROUND_TOP + 8 {
            self.cols[finish_col][row] = TileKind::FinishMarker;
        }
        // Clouds, purely cosmetic.
        for col in (3..length).step_by(11) {
            if self.cols[col][17] == TileKind::Empty {
                self.cols[col][17] = TileKind::Decoration;
            }
        }
        let tiles = self.cols.into_iter().flatten().collect();
        LevelSpec {
            seed,
            difficulty,
            length,
            tiles,
            spawns: self.spawns,
            spawn_x: SPAWN_X,
            finish_col,
        }
    }
}

/// Same `(seed, difficulty)` always yields the same layout.
pub fn generate_level(seed: u64, difficulty: u8) -> Result<LevelSpec> {
    if difficulty > MAX_DIFFICULTY {
        return Err(invalid(format!("difficulty {difficulty} not in 0..=2")));
    }
    let d = difficulty as usize;
    let mut rng = SplitMix64::new(seed);
    // Pit slots are drawn unconditionally to keep the draw order fixed.
    let first_pit = 2 + rng.below(4) as usize;
    let second_pit = 6 + rng.below(3) as usize;

    let mut b = Builder::default();
    b.flat(START_FLAT);

    for segment in 0..SEGMENTS {
        let kind_roll = rng.below(100);
        let len_roll = rng.below(4) as usize;
        let height_roll = rng.below(2) as usize;
        let monster_roll = rng.unit();
        let variant = rng.below(4) as usize;
        let extra = rng.below(3) as usize;

        let wants_pit = (d >= 1 && segment == first_pit) || (d >= 2 && segment == second_pit);
        if wants_pit {
            b.flat(4);
            b.pit(1 + d);
            b.flat(4);
        }

        let monster_threshold = [0.3, 0.55, 0.75][d];
        let monster_kind = if d == 2 && variant % 2 == 0 {
            EntityKind::MonsterShell
        } else {
            EntityKind::MonsterWalker
        };

        match kind_roll {
            0..=29 => {
                // Flat stretch, possibly guarded.
                let n = 6 + len_roll + 2 * d;
                let start = b.len();
                b.flat(n);
                if monster_roll < monster_threshold {
                    b.monster(start + n / 2, monster_kind);
                }
                if d >= 1 && monster_roll < monster_threshold / 3.0 {
                    b.monster(start + n - 1, EntityKind::MonsterWalker);
                }
            }
            30..=54 => {
                // Wall or pipe, then a landing strip.
                if variant < 2 {
                    b.wall(1 + height_roll + d, TileKind::Wall, 1);
                } else {
                    b.wall(2 + height_roll.min(1) + d / 2, TileKind::Pipe, 2);
                }
                let start = b.len();
                let n = 5 + len_roll;
                b.flat(n);
                if d >= 1 && monster_roll < monster_threshold / 2.0 {
                    b.monster(start + n - 1, monster_kind);
                }
            }
            55..=77 => {
                // Coin run along the ground, with a small arc above it.
                let start = b.len();
                let n = 7 + len_roll;
                b.flat(n);
                let run = 3 + variant;
                for i in 0..run.min(n) {
                    b.set(start + i, GROUND_TOP, TileKind::Coin);
                }
                for i in 0..3 {
                    b.set(start + run.min(n - 3) + i, GROUND_TOP + 3 + (i % 2), TileKind::Coin);
                }
                if d >= 1 && monster_roll < monster_threshold / 2.0 {
                    b.monster(start + n - 1, monster_kind);
                }
            }
            _ => {
                // Block cluster overhead.
                let start = b.len();
                let n = 7 + len_roll;
                b.flat(n);
                let pattern: [TileKind; 3] = match variant {
                    0 => [TileKind::Brick, TileKind::Question, TileKind::Brick],
                    1 => [TileKind::Question, TileKind::MushroomSpawner, TileKind::Question],
                    2 => [TileKind::Brick, TileKind::FlowerSpawner, TileKind::Brick],
                    _ => [TileKind::Platform, TileKind::Platform, TileKind::Question],
                };
                for (i, kind) in pattern.iter().enumerate() {
                    b.set(start + 2 + extra + i, BLOCK_ROW, *kind);
                }
                b.set(start + 1, GROUND_TOP, TileKind::Coin);
                if d >= 2 && monster_roll < monster_threshold {
                    b.monster(start + n - 1, monster_kind);
                }
            }
        }
    }

    if d >= 2 {
        // A fireball crossing the final stretch at head height.
        let col = b.len() + 2;
        b.spawns.push(EntitySpawn { kind: EntityKind::Fireball, x: col as f64, y: (GROUND_TOP + 1) as f64 });
    }
    b.flat(END_FLAT);
    Ok(b.finish(seed, difficulty))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_layout() {
        let a = generate_level(121, 0).unwrap();
        let b = generate_level(121, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn pit_counts_by_difficulty() {
        assert_eq!(generate_level(121, 0).unwrap().pit_count(), 0);
        assert!(generate_level(121, 1).unwrap().pit_count() >= 1);
        assert!(generate_level(121, 2).unwrap().pit_count() >= 1);
    }

    #[test]
    fn difficulty_out_of_range_is_rejected() {
        assert!(matches!(generate_level(121, 3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn difficulty_adds_hazards_for_many_seeds() {
        for seed in 0..200u64 {
            let l: Vec<_> = (0..=2).map(|d| generate_level(seed, d).unwrap()).collect();
            assert_eq!(l[0].pit_count(), 0, "seed {seed}");
            assert!(l[1].pit_count() >= 1 && l[2].pit_count() >= l[1].pit_count(), "seed {seed}");
            assert!(l[0].monster_count() <= l[1].monster_count(), "seed {seed}");
            assert!(l[1].monster_count() <= l[2].monster_count(), "seed {seed}");
            let tallest = |lv: &LevelSpec| {
                (0..lv.length() as i64)
                    .map(|c| (GROUND_TOP as i64..LEVEL_ROWS as i64).filter(|&r| lv.tile(c, r) == TileKind::Wall).count())
                    .max()
                    .unwrap_or(0)
            };
            assert!(tallest(&l[0]) <= tallest(&l[1]) && tallest(&l[1]) <= tallest(&l[2]), "seed {seed}");
        }
    }

    #[test]
    fn json_round_trip() {
        let level = generate_level(7, 2).unwrap();
        let back = LevelSpec::from_json(&level.to_json().unwrap()).unwrap();
        assert_eq!(level, back);
    }

    #[test]
    fn document_rejects_bad_codes() {
        let mut doc = generate_level(7, 0).unwrap().to_document();
        doc.rows[0][0] = 14;
        assert!(LevelSpec::try_from(doc).is_err());
    }
}
