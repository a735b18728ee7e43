//! Live training sessions: an environment-learner loop per session running at
//! the tick rate, keypress feedback and the train toggle over WebSocket,
//! per-game performance bars, competitive leaderboards and downloadable logs.

pub mod leaderboard;
pub mod protocol;
pub mod server;
pub mod session;

pub use leaderboard::{Leaderboard, LeaderboardEntry};
pub use protocol::{ClientMessage, CreateSession, Frame, Mode, ServerMessage, SessionCreated};
pub use server::{router, AppState};
pub use session::{BarWindow, Session, SessionConfig, SessionFlags, TickOutcome};

#[derive(Debug, thiserror::Error)]
pub enum LiveError {
    #[error("{0}")]
    Invalid(String),
    #[error("unknown session {0}")]
    UnknownSession(u64),
    #[error(transparent)]
    Core(#[from] tamer_core::Error),
}

pub type LiveResult<T> = std::result::Result<T, LiveError>;
