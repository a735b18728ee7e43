//! Value iteration over a learned human-reward table, for tabular tasks.
//! With a zero discount the action values are the reward estimates
//! themselves, which is the myopic agent used in the platformer.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const CONVERGED: f64 = 1e-10;
const MAX_SWEEPS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    /// `transitions[(s * n_actions + a) * n_states + s2]`
    transitions: Vec<f64>,
    gamma: f64,
}

impl TabularMdp {
    pub fn new(n_states: usize, n_actions: usize, transitions: Vec<f64>, gamma: f64) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(invalid("an MDP needs at least one state and one action"));
        }
        if transitions.len() != n_states * n_actions * n_states {
            return Err(invalid("transition tensor has the wrong size"));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(invalid(format!("discount {gamma} outside [0, 1)")));
        }
        for row in transitions.chunks(n_states) {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-12 {
                return Err(invalid("each T(s, a, .) must be a probability distribution"));
            }
        }
        Ok(Self { n_states, n_actions, transitions, gamma })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        let at = (s * self.n_actions + a) * self.n_states;
        &self.transitions[at..at + self.n_states]
    }

    fn check_rewards(&self, rhat: &[f64]) -> Result<()> {
        if rhat.len() != self.n_states * self.n_actions {
            return Err(invalid("reward table must hold one entry per state-action pair"));
        }
        Ok(())
    }
}

/// Action values, row-major by state.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    pub n_actions: usize,
    pub values: Vec<f64>,
}

impl QTable {
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn greedy(&self, s: usize) -> usize {
        argmax(self.row(s))
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Sweeps `Q(s,a) <- R(s,a) + gamma * sum_s' T(s,a,s') max_a' Q(s',a')` until
/// the largest change falls below 1e-10.
pub fn vi_update(mdp: &TabularMdp, rhat: &[f64]) -> Result<QTable> {
    mdp.check_rewards(rhat)?;
    let (ns, na) = (mdp.n_states, mdp.n_actions);
    if mdp.gamma == 0.0 {
        return Ok(QTable { n_actions: na, values: rhat.to_vec() });
    }
    let mut q = vec![0.0; ns * na];
    for _ in 0..MAX_SWEEPS {
        let best: Vec<f64> = (0..ns).map(|s| q[s * na..(s + 1) * na].iter().copied().fold(f64::MIN, f64::max)).collect();
        let mut change: f64 = 0.0;
        for s in 0..ns {
            for a in 0..na {
                let future: f64 = mdp.transition(s, a).iter().zip(&best).map(|(p, v)| p * v).sum();
                let updated = rhat[s * na + a] + mdp.gamma * future;
                change = change.max((updated - q[s * na + a]).abs());
                q[s * na + a] = updated;
            }
        }
        if change < CONVERGED {
            break;
        }
    }
    Ok(QTable { n_actions: na, values: q })
}

/// State values by `V(s) <- max_a [R(s,a) + gamma * sum_s' T(s,a,s') V(s')]`.
pub fn state_values(mdp: &TabularMdp, rhat: &[f64]) -> Result<Vec<f64>> {
    mdp.check_rewards(rhat)?;
    let (ns, na) = (mdp.n_states, mdp.n_actions);
    let mut v = vec![0.0; ns];
    for _ in 0..MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for s in 0..ns {
            let best = (0..na)
                .map(|a| rhat[s * na + a] + mdp.gamma * lookahead(mdp, s, a, &v))
                .fold(f64::MIN, f64::max);
            change = change.max((best - v[s]).abs());
            v[s] = best;
        }
        if change < CONVERGED {
            break;
        }
    }
    Ok(v)
}

fn lookahead(mdp: &TabularMdp, s: usize, a: usize, v: &[f64]) -> f64 {
    mdp.transition(s, a).iter().zip(v).map(|(p, x)| p * x).sum()
}

/// One-step lookahead choice `argmax_a R(s,a) + gamma * sum_s' T(s,a,s') V(s')`,
/// lowest index on ties.
pub fn select_action_vi(mdp: &TabularMdp, rhat: &[f64], v: &[f64], state: usize) -> Result<usize> {
    mdp.check_rewards(rhat)?;
    if v.len() != mdp.n_states || state >= mdp.n_states {
        return Err(invalid("state or value table out of range"));
    }
    let na = mdp.n_actions;
    let scores: Vec<f64> =
        (0..na).map(|a| rhat[state * na + a] + mdp.gamma * lookahead(mdp, state, a, v)).collect();
    Ok(argmax(&scores))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn self_loops(gamma: f64) -> TabularMdp {
        // Two states, two actions, every action stays put.
        let t = vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        TabularMdp::new(2, 2, t, gamma).unwrap()
    }

    #[test]
    fn zero_discount_returns_rewards() {
        let rhat = [0.3, -1.0, 2.5, 0.0];
        let q = vi_update(&self_loops(0.0), &rhat).unwrap();
        assert_eq!(q.values, rhat.to_vec());
    }

    #[test]
    fn geometric_series_on_self_loops() {
        let q = vi_update(&self_loops(0.5), &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((q.get(0, 0) - 2.0).abs() < 1e-9);
        assert!((q.get(0, 1) - 2.0).abs() < 1e-9);
        assert!(q.get(1, 0).abs() < 1e-9);
    }

    #[test]
    fn lookahead_prefers_entering_the_rewarding_state() {
        // From s1, action 0 stays in s1 and action 1 moves to s0.
        let t = vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0];
        let mdp = TabularMdp::new(2, 2, t, 0.5).unwrap();
        let rhat = [1.0, 1.0, 0.0, 0.0];
        let v = state_values(&mdp, &rhat).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-9);
        assert_eq!(select_action_vi(&mdp, &rhat, &v, 1).unwrap(), 1);
    }

    #[test]
    fn flat_rewards_tie_break_to_zero() {
        let mdp = self_loops(0.9);
        let v = state_values(&mdp, &[0.0; 4]).unwrap();
        assert_eq!(select_action_vi(&mdp, &[0.0; 4], &v, 0).unwrap(), 0);
    }

    #[test]
    fn rejects_invalid_mdps() {
        assert!(TabularMdp::new(2, 2, vec![0.5; 8], 1.0).is_err());
        assert!(TabularMdp::new(2, 2, vec![0.4; 8], 0.5).is_err());
        assert!(TabularMdp::new(2, 2, vec![0.5; 7], 0.5).is_err());
    }
}
