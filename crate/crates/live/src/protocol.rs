//! JSON messages exchanged with browser clients.

use serde::{Deserialize, Serialize};

use tamer_core::sim::{EntityKind, Observation, VIEW_COLS};

use crate::leaderboard::LeaderboardEntry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Training,
    NotTraining,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityView {
    pub kind: EntityKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarioView {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub on_ground: bool,
}

/// Everything a client needs to draw one tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub tick: u64,
    /// Seconds since the session started.
    pub elapsed: f64,
    pub level: u8,
    /// World column of the leftmost visible tile column.
    pub origin_col: i64,
    /// Tile codes of the visible screen, top row first.
    pub tiles: Vec<[u8; VIEW_COLS]>,
    pub entities: Vec<EntityView>,
    pub mario: MarioView,
    /// Score of the game in progress, in points.
    pub score: f64,
    /// Finished games in the window followed by the game in progress.
    pub bars: Vec<f64>,
    pub mode: Mode,
    pub started: bool,
    pub closed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaderboard: Option<Vec<LeaderboardEntry>>,
}

impl Frame {
    pub(crate) fn views(obs: &Observation) -> (Vec<EntityView>, MarioView) {
        let entities = obs.entities.iter().map(|e| EntityView { kind: e.kind, x: e.x, y: e.y }).collect();
        let m = obs.mario;
        (entities, MarioView { x: m.x, y: m.y, vx: m.vx, vy: m.vy, on_ground: m.on_ground })
    }
}

/// Server to client.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ServerMessage {
    Frame(Frame),
    Ack { accepted: bool },
    Error { message: String },
}

/// Client to server.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ClientMessage {
    Feedback {
        sign: i8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_client: Option<f64>,
    },
    Toggle,
    Start,
}

/// Body of `POST /sessions`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub name: String,
    #[serde(default)]
    pub competitive: bool,
    #[serde(default)]
    pub facial_expression_told: bool,
    /// Leaderboard room; competitive sessions without one share "default".
    #[serde(default)]
    pub group: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub id: u64,
    /// Name shown on the leaderboard, suffixed if it clashed.
    pub name: String,
    pub ws: String,
    pub log: String,
}
