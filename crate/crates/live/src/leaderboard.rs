//! Competitive groups: each member's last game score, ranked.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub session_id: u64,
    pub name: String,
    /// Score of the member's last finished game, in points.
    pub score: f64,
    pub rank: usize,
}

#[derive(Clone, Debug)]
struct Member {
    session_id: u64,
    name: String,
    score: f64,
    /// When the current score was achieved; earlier wins ties.
    achieved: u64,
}

/// All competitive groups. Updates are serialized by whoever owns it.
#[derive(Clone, Debug, Default)]
pub struct Leaderboard {
    groups: BTreeMap<String, Vec<Member>>,
    clock: u64,
}

impl Leaderboard {
    pub fn new() -> Self {
        Self::default()
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Adds a member with score 0 and returns the name shown, suffixed if the
    /// group already has someone by that name.
    pub fn join(&mut self, group: &str, session_id: u64, name: &str) -> String {
        let achieved = self.tick();
        let members = self.groups.entry(group.to_string()).or_default();
        let mut shown = name.to_string();
        let mut n = 1;
        while members.iter().any(|m| m.name == shown) {
            n += 1;
            shown = format!("{name} ({n})");
        }
        members.push(Member { session_id, name: shown.clone(), score: 0.0, achieved });
        shown
    }

    pub fn leave(&mut self, group: &str, session_id: u64) {
        if let Some(members) = self.groups.get_mut(group) {
            members.retain(|m| m.session_id != session_id);
        }
    }

    /// Records a finished game; the last game always replaces the previous score.
    pub fn record_game(&mut self, group: &str, session_id: u64, score: f64) {
        let achieved = self.tick();
        if let Some(m) = self.groups.get_mut(group).and_then(|ms| ms.iter_mut().find(|m| m.session_id == session_id)) {
            m.score = score;
            m.achieved = achieved;
        }
    }

    /// Members ranked by score, highest first; equal scores keep the order in
    /// which they were reached.
    pub fn standings(&self, group: &str) -> Vec<LeaderboardEntry> {
        let mut members: Vec<&Member> = self.groups.get(group).map(|ms| ms.iter().collect()).unwrap_or_default();
        members.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.achieved.cmp(&b.achieved)));
        members
            .into_iter()
            .enumerate()
            .map(|(i, m)| LeaderboardEntry { session_id: m.session_id, name: m.name.clone(), score: m.score, rank: i + 1 })
            .collect()
    }

    pub fn members(&self, group: &str) -> Vec<u64> {
        self.groups.get(group).map(|ms| ms.iter().map(|m| m.session_id).collect()).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_member_ranks_first_at_zero() {
        let mut lb = Leaderboard::new();
        lb.join("room", 1, "ann");
        let s = lb.standings("room");
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].rank, s[0].score), (1, 0.0));
    }

    #[test]
    fn duplicate_names_are_suffixed() {
        let mut lb = Leaderboard::new();
        assert_eq!(lb.join("room", 1, "ann"), "ann");
        assert_eq!(lb.join("room", 2, "ann"), "ann (2)");
        assert_eq!(lb.join("other", 3, "ann"), "ann");
    }

    #[test]
    fn last_game_counts_and_ties_keep_order() {
        let mut lb = Leaderboard::new();
        lb.join("room", 1, "a");
        lb.join("room", 2, "b");
        lb.join("room", 3, "c");
        lb.record_game("room", 2, 50.0);
        lb.record_game("room", 3, 50.0);
        lb.record_game("room", 1, 120.0);
        let ids: Vec<u64> = lb.standings("room").iter().map(|e| e.session_id).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        lb.record_game("room", 1, -10.0);
        let s = lb.standings("room");
        assert_eq!(s.iter().map(|e| e.session_id).collect::<Vec<_>>(), vec![2, 3, 1]);
        assert_eq!(s.iter().map(|e| e.rank).collect::<Vec<_>>(), vec![1, 2, 3]);
    }
}
