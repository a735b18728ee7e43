//! HTTP and WebSocket front end. Each session runs on its own task that owns
//! the session state; clients reach it through a command queue, so the model
//! is never touched from two places. Sessions share only the leaderboard.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::time::MissedTickBehavior;

use tamer_core::rng::SplitMix64;

use crate::leaderboard::Leaderboard;
use crate::protocol::{ClientMessage, CreateSession, ServerMessage, SessionCreated};
use crate::session::{Session, SessionConfig, SessionFlags};
use crate::LiveError;

const DEFAULT_GROUP: &str = "default";

enum Command {
    Client { message: ClientMessage, received: f64, reply: oneshot::Sender<ServerMessage> },
    Log(oneshot::Sender<Result<String, String>>),
}

/// A serialized server message and whether it is the last one.
type Broadcast = (Arc<str>, bool);

#[derive(Clone)]
struct Handle {
    commands: mpsc::UnboundedSender<Command>,
    frames: broadcast::Sender<Broadcast>,
    final_log: Arc<Mutex<Option<String>>>,
}

struct Inner {
    config: SessionConfig,
    seed_base: u64,
    log_dir: Option<PathBuf>,
    epoch: Instant,
    next_id: AtomicU64,
    sessions: Mutex<HashMap<u64, Handle>>,
    leaderboard: Mutex<Leaderboard>,
}

impl Inner {
    fn now(&self) -> f64 {
        self.epoch.elapsed().as_secs_f64()
    }

    fn handle(&self, id: u64) -> Option<Handle> {
        self.sessions.lock().expect("session map").get(&id).cloned()
    }
}

/// Shared server state; cheap to clone.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// `seed_base` fixes every session's environment seed by session id.
    /// Finished logs are written to `log_dir` as `session-<id>.jsonl`.
    pub fn new(config: SessionConfig, seed_base: u64, log_dir: Option<PathBuf>) -> Result<Self, LiveError> {
        config.validate()?;
        Ok(Self {
            inner: Arc::new(Inner {
                config,
                seed_base,
                log_dir,
                epoch: Instant::now(),
                next_id: AtomicU64::new(1),
                sessions: Mutex::new(HashMap::new()),
                leaderboard: Mutex::new(Leaderboard::new()),
            }),
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.inner.config
    }

    /// Creates a session and starts its tick loop on the current runtime.
    pub fn create_session(&self, request: &CreateSession) -> Result<SessionCreated, LiveError> {
        let inner = &self.inner;
        let id = inner.next_id.fetch_add(1, Ordering::Relaxed);
        let env_seed = SplitMix64::derive(inner.seed_base, id).next_u64();
        let flags = SessionFlags { facial_expression_told: request.facial_expression_told, competitive: request.competitive };
        let group = request.competitive.then(|| request.group.clone().unwrap_or_else(|| DEFAULT_GROUP.to_string()));
        let mut session = Session::new(id, &request.name, flags, group.clone(), inner.config.clone(), env_seed)?;
        let name = match &group {
            Some(g) => inner.leaderboard.lock().expect("leaderboard").join(g, id, request.name.trim()),
            None => request.name.trim().to_string(),
        };
        session.set_display_name(&name);

        let (commands, rx) = mpsc::unbounded_channel();
        let (frames, _) = broadcast::channel(64);
        let handle = Handle { commands, frames: frames.clone(), final_log: Arc::new(Mutex::new(None)) };
        inner.sessions.lock().expect("session map").insert(id, handle.clone());
        tokio::spawn(run_session(session, self.inner.clone(), rx, frames, handle.final_log));
        tracing::info!(id, name = %name, competitive = request.competitive, "session created");
        Ok(SessionCreated { id, name, ws: format!("/sessions/{id}/ws"), log: format!("/sessions/{id}/log") })
    }

    /// Current log of a session as JSON lines.
    pub async fn session_log(&self, id: u64) -> Result<String, LiveError> {
        let handle = self.inner.handle(id).ok_or(LiveError::UnknownSession(id))?;
        if let Some(text) = handle.final_log.lock().expect("final log").clone() {
            return Ok(text);
        }
        let (tx, rx) = oneshot::channel();
        if handle.commands.send(Command::Log(tx)).is_err() {
            // The session finished between the two checks.
            return handle.final_log.lock().expect("final log").clone().ok_or(LiveError::UnknownSession(id));
        }
        match rx.await {
            Ok(result) => result.map_err(LiveError::Invalid),
            Err(_) => handle.final_log.lock().expect("final log").clone().ok_or(LiveError::UnknownSession(id)),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/log", get(download_log))
        .route("/sessions/{id}/ws", get(connect))
        .with_state(state)
}

impl IntoResponse for LiveError {
    fn into_response(self) -> Response {
        let status = match self {
            LiveError::Invalid(_) => StatusCode::BAD_REQUEST,
            LiveError::UnknownSession(_) => StatusCode::NOT_FOUND,
            LiveError::Core(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ServerMessage::Error { message: self.to_string() })).into_response()
    }
}

async fn create(State(state): State<AppState>, Json(request): Json<CreateSession>) -> Result<Json<SessionCreated>, LiveError> {
    state.create_session(&request).map(Json)
}

async fn download_log(State(state): State<AppState>, Path(id): Path<u64>) -> Result<Response, LiveError> {
    let text = state.session_log(id).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

async fn connect(State(state): State<AppState>, Path(id): Path<u64>, ws: WebSocketUpgrade) -> Result<Response, LiveError> {
    let handle = state.inner.handle(id).ok_or(LiveError::UnknownSession(id))?;
    let inner = state.inner.clone();
    Ok(ws.on_upgrade(move |socket| client_loop(socket, handle, inner)))
}

async fn client_loop(mut socket: WebSocket, handle: Handle, inner: Arc<Inner>) {
    let mut frames = handle.frames.subscribe();
    if handle.final_log.lock().expect("final log").is_some() {
        let _ = send(&mut socket, &ServerMessage::Error { message: "session closed".into() }).await;
        return;
    }
    loop {
        tokio::select! {
            frame = frames.recv() => match frame {
                Ok((text, last)) => {
                    if socket.send(Message::Text(text.as_ref().into())).await.is_err() || last {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => break,
            },
            incoming = socket.recv() => {
                let Some(Ok(message)) = incoming else { break };
                let text = match message {
                    Message::Text(t) => t,
                    Message::Close(_) => break,
                    _ => continue,
                };
                let received = inner.now();
                let reply = match serde_json::from_str::<ClientMessage>(text.as_str()) {
                    Ok(message) => {
                        let (tx, rx) = oneshot::channel();
                        if handle.commands.send(Command::Client { message, received, reply: tx }).is_err() {
                            break;
                        }
                        match rx.await {
                            Ok(reply) => reply,
                            Err(_) => break,
                        }
                    }
                    Err(e) => ServerMessage::Error { message: format!("bad message: {e}") },
                };
                if send(&mut socket, &reply).await.is_err() {
                    break;
                }
            }
        }
    }
}

async fn send(socket: &mut WebSocket, message: &ServerMessage) -> Result<(), axum::Error> {
    let text = serde_json::to_string(message).expect("messages serialize");
    socket.send(Message::Text(text.into())).await
}

fn frame_message(session: &Session, inner: &Inner) -> Arc<str> {
    let mut frame = session.frame();
    if let Some(group) = session.group() {
        frame.leaderboard = Some(inner.leaderboard.lock().expect("leaderboard").standings(group));
    }
    serde_json::to_string(&ServerMessage::Frame(frame)).expect("frames serialize").into()
}

fn handle_client(session: &mut Session, message: ClientMessage, received: f64) -> ServerMessage {
    match message {
        ClientMessage::Feedback { sign, t_client } => match session.submit_feedback(sign, t_client, received) {
            Ok(accepted) => ServerMessage::Ack { accepted },
            Err(e) => ServerMessage::Error { message: e.to_string() },
        },
        ClientMessage::Toggle => {
            session.toggle();
            ServerMessage::Ack { accepted: !session.is_closed() }
        }
        ClientMessage::Start => {
            session.start(received);
            ServerMessage::Ack { accepted: session.is_started() }
        }
    }
}

async fn run_session(
    mut session: Session,
    inner: Arc<Inner>,
    mut commands: mpsc::UnboundedReceiver<Command>,
    frames: broadcast::Sender<Broadcast>,
    final_log: Arc<Mutex<Option<String>>>,
) {
    let mut interval = tokio::time::interval(Duration::from_secs_f64(1.0 / session.config().tick_rate));
    interval.set_missed_tick_behavior(MissedTickBehavior::Skip);
    loop {
        tokio::select! {
            _ = interval.tick() => {
                let outcome = match session.tick(inner.now()) {
                    Ok(o) => o,
                    Err(e) => {
                        tracing::error!(id = session.id(), "tick failed: {e}");
                        let _ = session.close(inner.now());
                        break;
                    }
                };
                if let (Some(score), Some(group)) = (outcome.game_ended, session.group()) {
                    inner.leaderboard.lock().expect("leaderboard").record_game(group, session.id(), score);
                }
                if outcome.closed {
                    break;
                }
                if frames.receiver_count() > 0 {
                    let _ = frames.send((frame_message(&session, &inner), false));
                }
            }
            command = commands.recv() => match command {
                Some(Command::Client { message, received, reply }) => {
                    let _ = reply.send(handle_client(&mut session, message, received));
                }
                Some(Command::Log(reply)) => {
                    let text = session.log_snapshot().map(|l| l.to_jsonl()).map_err(|e| e.to_string());
                    let _ = reply.send(text);
                }
                None => break,
            },
        }
    }
    let _ = session.close(inner.now());
    let text = match session.log_snapshot() {
        Ok(log) => log.to_jsonl(),
        Err(e) => {
            tracing::error!(id = session.id(), "could not finish log: {e}");
            String::new()
        }
    };
    if let Some(dir) = &inner.log_dir {
        let path = dir.join(format!("session-{}.jsonl", session.id()));
        if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&path, &text)) {
            tracing::error!(id = session.id(), "could not write {}: {e}", path.display());
        }
    }
    *final_log.lock().expect("final log") = Some(text);
    let _ = frames.send((frame_message(&session, &inner), true));
    tracing::info!(id = session.id(), games = session.games().len(), "session closed");
    // Answer anyone who queued a request while the session was closing.
    commands.close();
    while let Some(command) = commands.recv().await {
        match command {
            Command::Client { reply, .. } => {
                let _ = reply.send(ServerMessage::Ack { accepted: false });
            }
            Command::Log(reply) => {
                let _ = reply.send(Ok(final_log.lock().expect("final log").clone().unwrap_or_default()));
            }
        }
    }
}

/// Serves the router until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
