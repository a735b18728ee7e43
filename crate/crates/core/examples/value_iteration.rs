//! Plans on a four-state corridor where only the far end pays, showing how
//! the discount turns a myopic choice into a far-sighted one.

use tamer_core::learner::{state_values, vi_update, TabularMdp};

fn main() -> tamer_core::Result<()> {
    // Actions: 0 = stay, 1 = advance. State 3 is absorbing.
    let (n, m) = (4, 2);
    let mut transitions = vec![0.0; n * m * n];
    for s in 0..n {
        transitions[(s * m) * n + s] = 1.0;
        transitions[(s * m + 1) * n + (s + 1).min(n - 1)] = 1.0;
    }
    // A small reward for staying everywhere, a large one for reaching the end.
    let mut rhat = vec![0.1; n * m];
    rhat[2 * m + 1] = 1.0;
    for gamma in [0.0, 0.5, 0.9] {
        let mdp = TabularMdp::new(n, m, transitions.clone(), gamma)?;
        let q = vi_update(&mdp, &rhat)?;
        let v = state_values(&mdp, &rhat)?;
        let policy: Vec<&str> = (0..n).map(|s| if q.greedy(s) == 1 { "advance" } else { "stay" }).collect();
        println!("gamma {gamma}: V = {:?}", v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>());
        println!("          policy {policy:?}");
    }
    Ok(())
}
