//! Drives one live session in-process on a virtual clock. The scripted
//! trainer rewards moving right and punishes standing still, reacting about
//! 0.4 s after what it saw.

use tamer_live::{Session, SessionConfig, SessionFlags};

fn main() -> Result<(), tamer_live::LiveError> {
    let config = SessionConfig { max_seconds: 120.0, ..SessionConfig::default() };
    let dt = 1.0 / config.tick_rate;
    let mut session = Session::new(1, "script", SessionFlags::default(), None, config, 5)?;
    session.start(0.0);
    let mut seen = std::collections::VecDeque::new();
    let mut now = 0.0;
    while !session.is_closed() {
        let frame = session.frame();
        seen.push_back((now, frame.mario.vx));
        while seen.front().is_some_and(|(t, _)| now - t >= 0.4) {
            let (t, vx) = seen.pop_front().unwrap();
            if ((t / dt).round() as u64) % 6 == 0 {
                session.submit_feedback(if vx > 0.05 { 1 } else { -1 }, None, now)?;
            }
        }
        if let Some(score) = session.tick(now)?.game_ended {
            println!("game {} ended at {now:.1}s with score {score:.2}", session.games().len());
        }
        now += dt;
    }
    let log = session.log_snapshot()?;
    let events: usize = log.records.iter().map(|r| r.events.len()).sum();
    println!("{} ticks, {} steps and {} presses logged", session.ticks(), log.records.len(), events);
    println!("bars {:?}", session.bars().bars());
    Ok(())
}
