use serde::{Deserialize, Serialize};

/// Rows in every level and in every observation.
pub const LEVEL_ROWS: usize = 21;
/// Columns visible in one observation.
pub const VIEW_COLS: usize = 16;
/// Height of the ground slab; Mario standing on flat ground has `y == GROUND_TOP`.
pub const GROUND_TOP: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum TileKind {
    Empty = 0,
    Ground = 1,
    /// Bottom cell of a pit column. Not solid; lets the pit be seen.
    PitMarker = 2,
    Brick = 3,
    Question = 4,
    Coin = 5,
    Pipe = 6,
    Wall = 7,
    Platform = 8,
    UsedBlock = 9,
    FlowerSpawner = 10,
    MushroomSpawner = 11,
    FinishMarker = 12,
    Decoration = 13,
}

impl TileKind {
    pub const COUNT: usize = 14;

    pub const ALL: [TileKind; Self::COUNT] = [
        TileKind::Empty,
        TileKind::Ground,
        TileKind::PitMarker,
        TileKind::Brick,
        TileKind::Question,
        TileKind::Coin,
        TileKind::Pipe,
        TileKind::Wall,
        TileKind::Platform,
        TileKind::UsedBlock,
        TileKind::FlowerSpawner,
        TileKind::MushroomSpawner,
        TileKind::FinishMarker,
        TileKind::Decoration,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn is_solid(self) -> bool {
        matches!(
            self,
            TileKind::Ground
                | TileKind::Brick
                | TileKind::Question
                | TileKind::Pipe
                | TileKind::Wall
                | TileKind::Platform
                | TileKind::UsedBlock
                | TileKind::FlowerSpawner
                | TileKind::MushroomSpawner
        )
    }

    /// Blocks that react to being hit from below.
    pub fn is_bumpable(self) -> bool {
        matches!(
            self,
            TileKind::Brick | TileKind::Question | TileKind::FlowerSpawner | TileKind::MushroomSpawner
        )
    }
}

/// The tile part of an observation: `VIEW_COLS` columns by `LEVEL_ROWS` rows.
/// `rows[0]` is the top row of the screen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileGrid {
    rows: Vec<[u8; VIEW_COLS]>,
}

impl TileGrid {
    pub(crate) fn from_rows(rows: Vec<[u8; VIEW_COLS]>) -> Self {
        debug_assert_eq!(rows.len(), LEVEL_ROWS);
        Self { rows }
    }

    pub fn rows(&self) -> &[[u8; VIEW_COLS]] {
        &self.rows
    }

    /// Tile at view column `col` and world row `row` (row 0 at the bottom).
    pub fn at(&self, col: usize, row: usize) -> TileKind {
        let code = self.rows[LEVEL_ROWS - 1 - row][col];
        TileKind::from_code(code).unwrap_or(TileKind::Empty)
    }

    pub fn codes(&self) -> impl Iterator<Item = u8> + '_ {
        self.rows.iter().flat_map(|r| r.iter().copied())
    }
}
