use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use futures::{SinkExt, StreamExt};
use http_body_util::BodyExt;
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

use tamer_core::harness::TrainingLog;
use tamer_live::{router, AppState, ServerMessage, SessionConfig, SessionCreated};

fn state() -> AppState {
    AppState::new(SessionConfig::default(), 1, None).unwrap()
}

async fn post_session(state: &AppState, body: &str) -> (StatusCode, String) {
    let request = Request::post("/sessions").header("content-type", "application/json").body(Body::from(body.to_string())).unwrap();
    let response = router(state.clone()).oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn get(state: &AppState, path: &str) -> (StatusCode, String) {
    let response = router(state.clone()).oneshot(Request::get(path).body(Body::empty()).unwrap()).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn spawn_server(state: &AppState) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(tamer_live::server::serve(listener, state.clone()));
    format!("ws://{addr}")
}

type Socket = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn next_message(ws: &mut Socket) -> ServerMessage {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(10), ws.next()).await.expect("server went quiet").unwrap().unwrap();
        if let Message::Text(text) = msg {
            return serde_json::from_str(text.as_str()).unwrap();
        }
    }
}

/// Sends a message and returns the reply, skipping frames in between.
async fn request(ws: &mut Socket, text: &str) -> ServerMessage {
    ws.send(Message::Text(text.into())).await.unwrap();
    loop {
        match next_message(ws).await {
            ServerMessage::Frame(_) => continue,
            other => return other,
        }
    }
}

async fn next_frame(ws: &mut Socket) -> tamer_live::Frame {
    loop {
        if let ServerMessage::Frame(f) = next_message(ws).await {
            return f;
        }
    }
}

#[tokio::test]
async fn create_validates_and_unknown_sessions_are_rejected() {
    let state = state();
    let (status, body) = post_session(&state, r#"{"name":"ann"}"#).await;
    assert_eq!(status, StatusCode::OK);
    let created: SessionCreated = serde_json::from_str(&body).unwrap();
    assert_eq!(created.ws, format!("/sessions/{}/ws", created.id));
    assert_eq!(created.log, format!("/sessions/{}/log", created.id));

    let (status, _) = post_session(&state, r#"{"name":""}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(&state, "/sessions/999/log").await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // A fresh session's log is a header and nothing else.
    let (status, body) = get(&state, &created.log).await;
    assert_eq!(status, StatusCode::OK);
    let log = TrainingLog::from_jsonl(&body).unwrap();
    assert!(log.records.is_empty());
    assert_eq!(log.header.tags["name"], "ann");
}

#[tokio::test]
async fn unknown_websocket_session_is_not_found() {
    let state = state();
    let base = spawn_server(&state).await;
    let err = tokio_tungstenite::connect_async(format!("{base}/sessions/42/ws")).await.unwrap_err();
    match err {
        tokio_tungstenite::tungstenite::Error::Http(response) => assert_eq!(response.status(), StatusCode::NOT_FOUND),
        other => panic!("unexpected error {other}"),
    }
}

#[tokio::test]
async fn keypresses_round_trip_into_the_log() {
    let state = state();
    let base = spawn_server(&state).await;
    let (_, body) = post_session(&state, r#"{"name":"ann"}"#).await;
    let created: SessionCreated = serde_json::from_str(&body).unwrap();
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("{base}{}", created.ws)).await.unwrap();

    let first = next_frame(&mut ws).await;
    assert!(!first.started);
    assert_eq!(first.score, 0.0);
    assert!(first.leaderboard.is_none());
    assert_eq!(request(&mut ws, r#"{"type":"start"}"#).await, ServerMessage::Ack { accepted: true });

    // 50 presses: the middle 20 while training is paused.
    let mut signs = Vec::new();
    for i in 0..50 {
        if i == 15 || i == 35 {
            assert_eq!(request(&mut ws, r#"{"type":"toggle"}"#).await, ServerMessage::Ack { accepted: true });
        }
        let sign = if i % 3 == 0 { -1 } else { 1 };
        signs.push(sign);
        let msg = format!(r#"{{"type":"feedback","sign":{sign},"t_client":{}}}"#, i as f64 * 0.05);
        assert_eq!(request(&mut ws, &msg).await, ServerMessage::Ack { accepted: true });
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    let bad = request(&mut ws, r#"{"type":"feedback","sign":2}"#).await;
    assert!(matches!(bad, ServerMessage::Error { .. }));
    let garbage = request(&mut ws, "not json").await;
    assert!(matches!(garbage, ServerMessage::Error { .. }));
    let frame = next_frame(&mut ws).await;
    assert!(frame.started && frame.tick > 0);
    assert_eq!(frame.bars.last(), Some(&frame.score));

    let (status, body) = get(&state, &created.log).await;
    assert_eq!(status, StatusCode::OK);
    let log = TrainingLog::from_jsonl(&body).unwrap();
    let events: Vec<_> = log.records.iter().flat_map(|r| r.events.iter().copied()).collect();
    assert_eq!(events.len(), 50);
    assert_eq!(events.iter().map(|e| e.value).collect::<Vec<_>>(), signs);
    assert!(events.windows(2).all(|w| w[0].time <= w[1].time));
    let frozen: Vec<bool> = events.iter().map(|e| e.frozen).collect();
    assert_eq!(frozen, (0..50).map(|i| (15..35).contains(&i)).collect::<Vec<_>>());
    assert!(events.iter().all(|e| e.client_time.is_some()));
}

#[tokio::test]
async fn competitive_groups_share_a_leaderboard() {
    let state = state();
    let base = spawn_server(&state).await;
    let (_, a) = post_session(&state, r#"{"name":"ann","competitive":true,"group":"room-1"}"#).await;
    let (_, b) = post_session(&state, r#"{"name":"ann","competitive":true,"group":"room-1"}"#).await;
    let (_, c) = post_session(&state, r#"{"name":"cy","competitive":false}"#).await;
    let a: SessionCreated = serde_json::from_str(&a).unwrap();
    let b: SessionCreated = serde_json::from_str(&b).unwrap();
    let c: SessionCreated = serde_json::from_str(&c).unwrap();
    assert_eq!(b.name, "ann (2)");

    let (mut wa, _) = tokio_tungstenite::connect_async(format!("{base}{}", a.ws)).await.unwrap();
    let board = next_frame(&mut wa).await.leaderboard.expect("competitive frames carry the leaderboard");
    assert_eq!(board.len(), 2);
    assert_eq!(board.iter().map(|e| e.rank).collect::<Vec<_>>(), vec![1, 2]);
    assert_eq!(board[0].session_id, a.id);
    assert!(board.iter().all(|e| e.score == 0.0));

    let (mut wb, _) = tokio_tungstenite::connect_async(format!("{base}{}", b.ws)).await.unwrap();
    let board_b = next_frame(&mut wb).await.leaderboard.unwrap();
    assert!(board_b.iter().any(|e| e.session_id == a.id));

    let (mut wc, _) = tokio_tungstenite::connect_async(format!("{base}{}", c.ws)).await.unwrap();
    for _ in 0..5 {
        assert!(next_frame(&mut wc).await.leaderboard.is_none());
    }
}
