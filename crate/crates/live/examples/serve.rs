//! Starts the live service on a local port.
//!
//! `cargo run --example serve -- 127.0.0.1:8080`, then
//! `curl -X POST localhost:8080/sessions -H 'content-type: application/json' -d '{"name":"me"}'`
//! and connect a WebSocket client to the returned `ws` path.

use tamer_live::server::serve;
use tamer_live::{AppState, SessionConfig};

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let addr = std::env::args().nth(1).unwrap_or_else(|| "127.0.0.1:8080".into());
    let state = AppState::new(SessionConfig::default(), 1, None).expect("default config is valid");
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    println!("listening on {}", listener.local_addr()?);
    serve(listener, state).await
}
