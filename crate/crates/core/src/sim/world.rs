use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::action::Action;
use super::entity::{Entity, EntityKind};
use super::level::{LevelSet, LevelSpec};
use super::score::{Score, ScoreEvent};
use super::tile::{TileGrid, TileKind, LEVEL_ROWS, VIEW_COLS};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

const EPS: f64 = 1e-9;
/// Half-width of the overlap test between two one-tile boxes.
const CONTACT_REACH: f64 = 0.8;
/// Columns left of Mario kept on screen.
const CAMERA_LEAD: i64 = 6;
/// How far ahead a solid tile may be and still count as a wall in front of Mario.
const WALL_PROBE: f64 = 0.3;

/// Kinematics constants, in tiles and steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Physics {
    pub gravity: f64,
    pub jump_impulse: f64,
    pub walk_speed: f64,
    pub sprint_speed: f64,
    pub max_fall_speed: f64,
    pub stomp_bounce: f64,
    pub walker_speed: f64,
    pub shell_speed: f64,
    pub fireball_speed: f64,
    pub mushroom_speed: f64,
    /// Monsters start moving once Mario is this many tiles away or closer.
    pub activation_range: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            gravity: 0.06,
            jump_impulse: 0.75,
            walk_speed: 0.25,
            sprint_speed: 0.4,
            max_fall_speed: 0.9,
            stomp_bounce: 0.45,
            walker_speed: 0.06,
            shell_speed: 0.12,
            fireball_speed: 0.15,
            mushroom_speed: 0.08,
            activation_range: 16.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MarioState {
    /// Bottom-left corner of Mario's one-tile box.
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub on_ground: bool,
    /// A solid tile blocks the way within a fraction of a tile to the right.
    pub right_of_wall: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    FinishedLevel,
    Died,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub score_delta: Score,
    pub events: Vec<ScoreEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub grid: TileGrid,
    /// World column shown in view column 0.
    pub origin_col: i64,
    pub entities: Vec<Entity>,
    pub mario: MarioState,
    pub level_number: u8,
}

impl Observation {
    /// Tile at a world position, `Empty` outside the view.
    pub fn tile(&self, col: i64, row: i64) -> TileKind {
        let view_col = col - self.origin_col;
        if view_col < 0 || view_col >= VIEW_COLS as i64 || row < 0 || row >= LEVEL_ROWS as i64 {
            return TileKind::Empty;
        }
        self.grid.at(view_col as usize, row as usize)
    }
}

/// One game in progress. Stepping is deterministic given the level set, the
/// physics constants, the environment seed and the action sequence.
#[derive(Clone, Debug)]
pub struct World {
    levels: Arc<LevelSet>,
    physics: Physics,
    level_number: u8,
    length: usize,
    finish_col: usize,
    tiles: Vec<TileKind>,
    mario: MarioState,
    entities: Vec<Entity>,
    step_index: u64,
    score: Score,
    game_over: bool,
    rng: SplitMix64,
}

impl World {
    pub fn new(levels: Arc<LevelSet>, physics: Physics, env_seed: u64) -> Self {
        let mut world = Self {
            levels,
            physics,
            level_number: 0,
            length: 0,
            finish_col: 0,
            tiles: Vec::new(),
            mario: MarioState::default(),
            entities: Vec::new(),
            step_index: 0,
            score: Score::ZERO,
            game_over: false,
            rng: SplitMix64::derive(env_seed, 3),
        };
        world.load_level(0);
        world
    }

    pub fn level_number(&self) -> u8 {
        self.level_number
    }

    pub fn level(&self) -> &LevelSpec {
        self.levels.get(self.level_number)
    }

    pub fn levels(&self) -> &Arc<LevelSet> {
        &self.levels
    }

    pub fn physics(&self) -> &Physics {
        &self.physics
    }

    pub fn mario(&self) -> &MarioState {
        &self.mario
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn score(&self) -> Score {
        self.score
    }

    pub fn is_game_over(&self) -> bool {
        self.game_over
    }

    pub fn tile(&self, col: i64, row: i64) -> TileKind {
        if col < 0 || row < 0 || col as usize >= self.length || row as usize >= LEVEL_ROWS {
            return TileKind::Empty;
        }
        self.tiles[col as usize * LEVEL_ROWS + row as usize]
    }

    /// Out-of-level columns act as walls so nothing leaves sideways.
    fn solid(&self, col: i64, row: i64) -> bool {
        if col < 0 || col as usize >= self.length {
            return row >= 0;
        }
        self.tile(col, row).is_solid()
    }

    fn set_tile(&mut self, col: i64, row: i64, kind: TileKind) {
        self.tiles[col as usize * LEVEL_ROWS + row as usize] = kind;
    }

    /// Moves Mario (for hand-built scenarios).
    pub fn place_mario(&mut self, x: f64, y: f64, vx: f64, vy: f64) {
        self.mario = MarioState { x, y, vx, vy, on_ground: false, right_of_wall: false };
        self.mario.on_ground = vy == 0.0 && self.standing_on_solid();
        self.mario.right_of_wall = self.wall_ahead();
    }

    pub fn push_entity(&mut self, entity: Entity) {
        self.entities.push(entity);
    }

    pub fn set_level_tile(&mut self, col: usize, row: usize, kind: TileKind) {
        self.set_tile(col as i64, row as i64, kind);
    }

    fn load_level(&mut self, level_number: u8) {
        self.level_number = level_number;
        let level = self.levels.get(level_number).clone();
        self.length = level.length();
        self.finish_col = level.finish_col;
        let spawn_x = level.spawn_x;
        let spawns = level.spawns.clone();
        self.tiles = level.into_tiles();
        self.entities.clear();
        let p = self.physics;
        for spawn in spawns {
            // Per-game variation: facing and pace of each monster.
            let faces_right = self.rng.chance(0.2);
            let pace = self.rng.uniform(0.85, 1.15);
            let base = match spawn.kind {
                EntityKind::MonsterWalker => p.walker_speed,
                EntityKind::MonsterShell => p.shell_speed,
                EntityKind::Fireball => p.fireball_speed,
                EntityKind::Mushroom => p.mushroom_speed,
                EntityKind::Flower | EntityKind::CoinPickup => 0.0,
            };
            let vx = match spawn.kind {
                EntityKind::Fireball => -base,
                _ if faces_right => base * pace,
                _ => -base * pace,
            };
            self.entities.push(Entity {
                kind: spawn.kind,
                x: spawn.x,
                y: spawn.y,
                vx,
                vy: 0.0,
                alive: true,
                active: false,
                ttl: 0,
            });
        }
        self.mario = MarioState {
            x: spawn_x,
            y: super::tile::GROUND_TOP as f64,
            ..MarioState::default()
        };
        self.mario.on_ground = self.standing_on_solid();
        self.mario.right_of_wall = self.wall_ahead();
    }

    /// Applies a finished or fatal level end to the level automaton:
    /// 0 -> 1 -> 2 -> 0 on finishing, back to 0 with the game over on death.
    pub fn advance_or_reset(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::FinishedLevel => {
                let next = (self.level_number + 1) % 3;
                self.load_level(next);
            }
            Outcome::Died => {
                self.load_level(0);
                self.game_over = true;
            }
        }
    }

    /// Starts a fresh game at level 0 with zero score. The environment's random
    /// stream carries on, so consecutive games differ.
    pub fn new_game(&mut self) {
        self.score = Score::ZERO;
        self.step_index = 0;
        self.game_over = false;
        self.load_level(0);
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.game_over {
            return Err(Error::IllegalState("step called on a finished game".into()));
        }
        let p = self.physics;
        let mut events = vec![ScoreEvent::Step];
        self.step_index += 1;

        let speed = if action.sprint { p.sprint_speed } else { p.walk_speed };
        self.mario.vx = action.direction.sign() * speed;
        if action.jump && self.mario.on_ground {
            self.mario.vy = p.jump_impulse;
            self.mario.on_ground = false;
        }
        self.mario.vy = (self.mario.vy - p.gravity).max(-p.max_fall_speed);
        let prev_y = self.mario.y;

        self.move_mario_x();
        self.move_mario_y(&mut events);
        self.collect_coins(&mut events);
        self.update_entities();
        let mut died = self.resolve_contacts(prev_y, &mut events);
        if self.mario.y < 0.0 {
            died = true;
        }

        let outcome = if died {
            events.push(ScoreEvent::Die);
            Some(Outcome::Died)
        } else if self.mario.x >= self.finish_col as f64 {
            events.push(ScoreEvent::FinishLevel);
            Some(Outcome::FinishedLevel)
        } else {
            None
        };

        let score_delta: Score = events.iter().map(|e| e.value()).sum();
        self.score += score_delta;
        match outcome {
            Some(o) => self.advance_or_reset(o),
            None => self.mario.right_of_wall = self.wall_ahead(),
        }
        Ok(StepResult { score_delta, events })
    }

    fn body_rows(y: f64) -> std::ops::RangeInclusive<i64> {
        (y + EPS).floor() as i64..=(y + 1.0 - EPS).floor() as i64
    }

    fn body_cols(x: f64) -> std::ops::RangeInclusive<i64> {
        (x + EPS).floor() as i64..=(x + 1.0 - EPS).floor() as i64
    }

    fn move_mario_x(&mut self) {
        let m = &mut self.mario;
        m.x += m.vx;
        let (x, y, vx) = (m.x, m.y, m.vx);
        if vx > 0.0 {
            let col = (x + 1.0 - EPS).floor() as i64;
            if Self::body_rows(y).any(|r| self.solid(col, r)) {
                self.mario.x = col as f64 - 1.0;
                self.mario.vx = 0.0;
            }
        } else if vx < 0.0 {
            let col = (x + EPS).floor() as i64;
            if Self::body_rows(y).any(|r| self.solid(col, r)) {
                self.mario.x = col as f64 + 1.0;
                self.mario.vx = 0.0;
            }
        }
    }

    fn move_mario_y(&mut self, events: &mut Vec<ScoreEvent>) {
        self.mario.y += self.mario.vy;
        let (x, y, vy) = (self.mario.x, self.mario.y, self.mario.vy);
        if vy > 0.0 {
            let row = (y + 1.0 - EPS).floor() as i64;
            let hit: Vec<i64> = Self::body_cols(x).filter(|&c| self.solid(c, row)).collect();
            if !hit.is_empty() {
                self.mario.y = row as f64 - 1.0;
                self.mario.vy = 0.0;
                let center = (x + 0.5).floor() as i64;
                let target = if hit.contains(&center) { center } else { hit[0] };
                self.bump(target, row, events);
            }
            self.mario.on_ground = false;
        } else {
            let row = (y + EPS).floor() as i64;
            if y >= 0.0 && Self::body_cols(x).any(|c| self.solid(c, row)) {
                self.mario.y = row as f64 + 1.0;
                self.mario.vy = 0.0;
                self.mario.on_ground = true;
            } else {
                self.mario.on_ground = false;
            }
        }
    }

    fn standing_on_solid(&self) -> bool {
        let below = (self.mario.y - 0.5).floor() as i64;
        (self.mario.y - self.mario.y.round()).abs() < EPS
            && Self::body_cols(self.mario.x).any(|c| self.solid(c, below))
    }

    fn wall_ahead(&self) -> bool {
        let col = (self.mario.x + 1.0 + WALL_PROBE - EPS).floor() as i64;
        Self::body_rows(self.mario.y).any(|r| self.solid(col, r))
    }

    fn bump(&mut self, col: i64, row: i64, events: &mut Vec<ScoreEvent>) {
        let kind = self.tile(col, row);
        if !kind.is_bumpable() {
            return;
        }
        let above = (col as f64, (row + 1) as f64);
        match kind {
            TileKind::Brick => self.set_tile(col, row, TileKind::Empty),
            TileKind::Question => {
                self.set_tile(col, row, TileKind::UsedBlock);
                events.push(ScoreEvent::Coin);
                self.entities.push(Entity {
                    kind: EntityKind::CoinPickup,
                    x: above.0,
                    y: above.1,
                    vx: 0.0,
                    vy: 0.2,
                    alive: true,
                    active: true,
                    ttl: 8,
                });
            }
            TileKind::MushroomSpawner | TileKind::FlowerSpawner => {
                self.set_tile(col, row, TileKind::UsedBlock);
                let (entity_kind, vx) = if kind == TileKind::MushroomSpawner {
                    (EntityKind::Mushroom, self.physics.mushroom_speed)
                } else {
                    (EntityKind::Flower, 0.0)
                };
                self.entities.push(Entity {
                    kind: entity_kind,
                    x: above.0,
                    y: above.1,
                    vx,
                    vy: 0.0,
                    alive: true,
                    active: true,
                    ttl: 0,
                });
            }
            _ => {}
        }
    }

    fn collect_coins(&mut self, events: &mut Vec<ScoreEvent>) {
        let (x, y) = (self.mario.x, self.mario.y);
        for col in Self::body_cols(x) {
            for row in Self::body_rows(y) {
                if self.tile(col, row) == TileKind::Coin {
                    self.set_tile(col, row, TileKind::Empty);
                    events.push(ScoreEvent::Coin);
                }
            }
        }
    }

    fn update_entities(&mut self) {
        let p = self.physics;
        let mario_x = self.mario.x;
        let mut entities = std::mem::take(&mut self.entities);
        for e in entities.iter_mut().filter(|e| e.alive) {
            match e.kind {
                EntityKind::MonsterWalker | EntityKind::MonsterShell | EntityKind::Mushroom => {
                    if !e.active {
                        if (e.x - mario_x).abs() > p.activation_range {
                            continue;
                        }
                        e.active = true;
                    }
                    self.walk_entity(e);
                }
                EntityKind::Fireball => {
                    if !e.active {
                        if (e.x - mario_x).abs() > p.activation_range {
                            continue;
                        }
                        e.active = true;
                    }
                    e.x += e.vx;
                    let (cx, cy) = e.center();
                    if self.solid(cx.floor() as i64, cy.floor() as i64) || e.x < 0.0 || e.x >= self.length as f64 {
                        e.alive = false;
                    }
                }
                EntityKind::Flower => {}
                EntityKind::CoinPickup => {
                    e.y += e.vy;
                    e.ttl = e.ttl.saturating_sub(1);
                    if e.ttl == 0 || e.y >= (LEVEL_ROWS - 1) as f64 {
                        e.alive = false;
                    }
                }
            }
        }
        entities.retain(|e| e.alive);
        self.entities = entities;
    }

    /// Walks along the ground, turning at walls and falling into pits.
    fn walk_entity(&self, e: &mut Entity) {
        let p = &self.physics;
        e.x += e.vx;
        if e.vx > 0.0 {
            let col = (e.x + 1.0 - EPS).floor() as i64;
            if Self::body_rows(e.y).any(|r| self.solid(col, r)) {
                e.x = col as f64 - 1.0;
                e.vx = -e.vx;
            }
        } else if e.vx < 0.0 {
            let col = (e.x + EPS).floor() as i64;
            if Self::body_rows(e.y).any(|r| self.solid(col, r)) {
                e.x = col as f64 + 1.0;
                e.vx = -e.vx;
            }
        }
        e.vy = (e.vy - p.gravity).max(-p.max_fall_speed);
        e.y += e.vy;
        let row = (e.y + EPS).floor() as i64;
        if e.y >= 0.0 && Self::body_cols(e.x).any(|c| self.solid(c, row)) {
            e.y = row as f64 + 1.0;
            e.vy = 0.0;
        }
        if e.y < 0.0 {
            e.alive = false;
        }
    }

    /// Returns true when Mario dies from a contact.
    fn resolve_contacts(&mut self, prev_y: f64, events: &mut Vec<ScoreEvent>) -> bool {
        let (mx, my) = (self.mario.x, self.mario.y);
        let mut died = false;
        let mut bounced = false;
        for e in self.entities.iter_mut().filter(|e| e.alive) {
            if (e.x - mx).abs() >= CONTACT_REACH || (e.y - my).abs() >= CONTACT_REACH {
                continue;
            }
            match e.kind {
                k if k.is_stompable() && self.mario.vy < 0.0 && prev_y >= e.y + 0.5 => {
                    e.alive = false;
                    events.push(ScoreEvent::Kill);
                    bounced = true;
                }
                k if k.is_hostile() => died = true,
                EntityKind::Mushroom | EntityKind::Flower => e.alive = false,
                _ => {}
            }
        }
        if bounced && !died {
            self.mario.vy = self.physics.stomp_bounce;
            self.mario.on_ground = false;
        }
        self.entities.retain(|e| e.alive);
        died
    }

    /// Camera: Mario sits a fixed lead from the left edge, clamped to the level.
    pub fn camera_origin(&self) -> i64 {
        let max_origin = self.length.saturating_sub(VIEW_COLS) as i64;
        (self.mario.x.floor() as i64 - CAMERA_LEAD).clamp(0, max_origin)
    }

    pub fn observe(&self) -> Observation {
        let origin = self.camera_origin();
        let rows = (0..LEVEL_ROWS)
            .rev()
            .map(|row| {
                let mut out = [0u8; VIEW_COLS];
                for (i, cell) in out.iter_mut().enumerate() {
                    *cell = self.tile(origin + i as i64, row as i64).code();
                }
                out
            })
            .collect();
        let right = (origin + VIEW_COLS as i64) as f64;
        let entities = self
            .entities
            .iter()
            .filter(|e| e.alive && e.x + 1.0 > origin as f64 && e.x < right)
            .cloned()
            .collect();
        Observation {
            grid: TileGrid::from_rows(rows),
            origin_col: origin,
            entities,
            mario: self.mario,
            level_number: self.level_number,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::action::Direction;
    use crate::sim::tile::GROUND_TOP;

    fn flat_world() -> World {
        World::new(Arc::new(LevelSet::repeat(LevelSpec::flat(60))), Physics::default(), 1)
    }

    const RUN: Action = Action::new(Direction::Right, false, true);
    const IDLE: Action = Action::new(Direction::None, false, false);

    #[test]
    fn quiet_step_costs_one_hundredth() {
        let mut w = flat_world();
        let r = w.step(IDLE).unwrap();
        assert_eq!(r.score_delta, Score(-1));
        assert_eq!(r.events, vec![ScoreEvent::Step]);
        assert!(w.mario().on_ground);
        assert_eq!(w.mario().vy, 0.0);
    }

    #[test]
    fn stomp_and_coin_in_one_step() {
        let mut w = flat_world();
        let g = GROUND_TOP as f64;
        w.push_entity(Entity {
            kind: EntityKind::MonsterWalker,
            x: 10.0,
            y: g,
            vx: 0.0,
            vy: 0.0,
            alive: true,
            active: false,
            ttl: 0,
        });
        w.set_level_tile(10, GROUND_TOP + 1, TileKind::Coin);
        // Falling onto the monster from just above it, through the coin.
        w.place_mario(10.0, g + 1.1, 0.0, -0.3);
        let r = w.step(IDLE).unwrap();
        assert_eq!(r.score_delta, Score(199));
        assert!(r.events.contains(&ScoreEvent::Kill));
        assert!(r.events.contains(&ScoreEvent::Coin));
        assert!(w.mario().vy > 0.0);
    }

    #[test]
    fn crossing_finish_advances_level() {
        let mut w = flat_world();
        let finish = w.level().finish_col as f64;
        w.place_mario(finish - 0.2, GROUND_TOP as f64, 0.0, 0.0);
        let r = w.step(RUN).unwrap();
        assert_eq!(r.score_delta, Score(9_999));
        assert_eq!(w.level_number(), 1);
        assert!(!w.is_game_over());
    }

    #[test]
    fn level_automaton() {
        let mut w = flat_world();
        w.advance_or_reset(Outcome::FinishedLevel);
        assert_eq!(w.level_number(), 1);
        w.advance_or_reset(Outcome::FinishedLevel);
        assert_eq!(w.level_number(), 2);
        w.advance_or_reset(Outcome::FinishedLevel);
        assert_eq!(w.level_number(), 0);
        w.advance_or_reset(Outcome::Died);
        assert_eq!(w.level_number(), 0);
        assert!(w.is_game_over());
        assert!(matches!(w.step(IDLE), Err(Error::IllegalState(_))));
    }

    #[test]
    fn touching_a_monster_from_the_side_kills() {
        let mut w = flat_world();
        let g = GROUND_TOP as f64;
        w.push_entity(Entity {
            kind: EntityKind::MonsterWalker,
            x: 5.5,
            y: g,
            vx: 0.0,
            vy: 0.0,
            alive: true,
            active: true,
            ttl: 0,
        });
        w.place_mario(4.5, g, 0.0, 0.0);
        let r = w.step(RUN).unwrap();
        assert!(r.events.contains(&ScoreEvent::Die));
        assert_eq!(r.score_delta, Score(-1_001));
        assert!(w.is_game_over());
    }

    #[test]
    fn walls_block_and_are_detected() {
        let mut w = flat_world();
        for row in GROUND_TOP..GROUND_TOP + 2 {
            w.set_level_tile(8, row, TileKind::Wall);
        }
        for _ in 0..40 {
            w.step(RUN).unwrap();
        }
        assert!((w.mario().x - 7.0).abs() < 1e-9);
        assert!(w.mario().right_of_wall);
    }

    #[test]
    fn falling_into_a_pit_kills() {
        let mut level = LevelSpec::flat(60);
        for col in 6..9 {
            level.set_tile(col, 0, TileKind::PitMarker);
            level.set_tile(col, 1, TileKind::Empty);
        }
        let mut w = World::new(Arc::new(LevelSet::repeat(level)), Physics::default(), 1);
        let mut died = false;
        for _ in 0..60 {
            let r = w.step(Action::new(Direction::Right, false, false)).unwrap();
            if r.events.contains(&ScoreEvent::Die) {
                died = true;
                break;
            }
        }
        assert!(died);
    }

    #[test]
    fn observation_is_pure_and_shows_spawn() {
        let w = World::new(Arc::new(LevelSet::generate(121)), Physics::default(), 3);
        let a = w.observe();
        assert_eq!(a, w.observe());
        assert_eq!(a.origin_col, 0);
        let spawn_col = w.level().spawn_x.floor() as i64;
        assert!(spawn_col >= a.origin_col && spawn_col < a.origin_col + VIEW_COLS as i64);
        assert!(a.grid.codes().all(|c| c < 14));
        assert_eq!(a.grid.rows().len(), LEVEL_ROWS);
    }
}
