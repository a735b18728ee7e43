//! Generates the three levels for a seed and draws each as text.
//!
//! `cargo run --example level_generation -- 121`

use tamer_core::sim::{generate_level, TileKind, LEVEL_ROWS, MAX_DIFFICULTY};

fn glyph(kind: TileKind) -> char {
    match kind {
        TileKind::Empty | TileKind::Decoration => ' ',
        TileKind::Ground => '#',
        TileKind::PitMarker => '_',
        TileKind::Brick => 'B',
        TileKind::Question => '?',
        TileKind::Coin => 'o',
        TileKind::Pipe => 'P',
        TileKind::Wall => '|',
        TileKind::Platform => '=',
        TileKind::UsedBlock => 'U',
        TileKind::FlowerSpawner => 'F',
        TileKind::MushroomSpawner => 'M',
        TileKind::FinishMarker => '!',
    }
}

fn main() -> tamer_core::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(121);
    for difficulty in 0..=MAX_DIFFICULTY {
        let level = generate_level(seed, difficulty)?;
        println!(
            "seed {seed} difficulty {difficulty}: {} columns, {} pits, {} monsters, finish at column {}",
            level.length(),
            level.pit_count(),
            level.monster_count(),
            level.finish_col
        );
        let width = level.length().min(120);
        for row in (0..12.min(LEVEL_ROWS)).rev() {
            let line: String = (0..width).map(|col| glyph(level.tile(col as i64, row as i64))).collect();
            println!("  {line}");
        }
        let marks: String = (0..width)
            .map(|col| if level.spawns.iter().any(|s| s.x.floor() as usize == col) { 'e' } else { ' ' })
            .collect();
        println!("  {marks}\n");
    }
    Ok(())
}
