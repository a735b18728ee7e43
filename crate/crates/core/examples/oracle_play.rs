//! Plays the scripted reference policy through full games and reports how far
//! it gets on each environment seed.

use std::sync::Arc;

use tamer_core::sim::{LevelSet, Physics, World, DEFAULT_LEVEL_SEED};
use tamer_core::trainer::oracle_action;

fn main() -> tamer_core::Result<()> {
    let levels = Arc::new(LevelSet::generate(DEFAULT_LEVEL_SEED));
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    for seed in 0..seeds {
        let mut world = World::new(levels.clone(), Physics::default(), seed);
        let mut finished = 0;
        let mut first_finish = None;
        let mut last_level = 0;
        while !world.is_game_over() && world.step_index() < 3000 {
            world.step(oracle_action(&world.observe()))?;
            if world.level_number() != last_level {
                finished += 1;
                first_finish.get_or_insert(world.step_index());
                last_level = world.level_number();
            }
        }
        println!(
            "seed {seed:>3}: score {:>8} levels finished {finished:>2} first finish at {:?} died {} on level {} x {:.1}",
            world.score(),
            first_finish,
            world.is_game_over(),
            world.level_number(),
            world.mario().x
        );
    }
    Ok(())
}
