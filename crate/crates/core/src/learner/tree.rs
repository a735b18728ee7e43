//! Incremental model tree: a regression tree whose leaves hold linear models
//! over the full feature vector.
//!
//! Each leaf trains its linear model by the same gradient step as
//! [`LinearRewardModel`](super::LinearRewardModel) and keeps a bounded buffer
//! of recent samples. Every `split_interval` samples a leaf looks for the
//! feature and threshold that most reduce the squared error of the labels
//! around their mean; if the reduction is large enough it becomes an
//! internal node and both children start from its weights, then take one
//! pass over their share of the buffer.

use serde::{Deserialize, Serialize};

use super::credit::CreditedSample;
use super::linear::{check_sample, dot, gradient_step};
use super::RewardEstimate;
use crate::error::Result;
use crate::features::{Theta, THETA_LEN};
use crate::sim::Action;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// Samples a leaf receives between split attempts.
    pub split_interval: usize,
    pub min_leaf: usize,
    pub max_depth: usize,
    /// Minimum error reduction, as a fraction of the leaf's error, for a split.
    pub min_gain: f64,
    /// Samples kept per leaf for split decisions.
    pub buffer: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { split_interval: 20, min_leaf: 8, max_depth: 6, min_gain: 0.05, buffer: 250 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub weights: Theta,
    pub depth: usize,
    pub seen: usize,
    samples: Vec<(Theta, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf(Leaf),
}

/// `feature`, `threshold` and the squared-error reduction of a candidate split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

fn sse(sum: f64, sum_sq: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (sum_sq - sum * sum / n as f64).max(0.0)
    }
}

/// Best split over all features, thresholds at midpoints between distinct
/// observed values, both sides holding at least `min_leaf` samples. Ties
/// keep the lowest feature index and the lowest threshold.
pub fn best_split(samples: &[(Theta, f64)], min_leaf: usize) -> Option<SplitChoice> {
    let n = samples.len();
    if n < 2 * min_leaf.max(1) {
        return None;
    }
    let total: f64 = samples.iter().map(|s| s.1).sum();
    let total_sq: f64 = samples.iter().map(|s| s.1 * s.1).sum();
    let parent = sse(total, total_sq, n);
    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = (0..n).collect();
    for feature in 0..THETA_LEN {
        order.sort_by(|&a, &b| samples[a].0[feature].total_cmp(&samples[b].0[feature]));
        let (mut left_sum, mut left_sq) = (0.0, 0.0);
        for k in 0..n - 1 {
            let (theta, y) = &samples[order[k]];
            left_sum += y;
            left_sq += y * y;
            let here = theta[feature];
            let next = samples[order[k + 1]].0[feature];
            let left_n = k + 1;
            if here == next || left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let gain = parent
                - sse(left_sum, left_sq, left_n)
                - sse(total - left_sum, total_sq - left_sq, n - left_n);
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitChoice { feature, threshold: 0.5 * (here + next), gain });
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelTree {
    nodes: Vec<Node>,
}

impl Default for ModelTree {
    fn default() -> Self {
        Self::with_weights([0.0; THETA_LEN])
    }
}

impl ModelTree {
    pub fn with_weights(weights: Theta) -> Self {
        Self { nodes: vec![Node::Leaf(Leaf { weights, depth: 0, seen: 0, samples: Vec::new() })] }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match &self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf(_) => None,
        }
    }

    fn route(&self, theta: &Theta) -> usize {
        let mut i = 0;
        while let Node::Split { feature, threshold, left, right } = &self.nodes[i] {
            i = if theta[*feature] <= *threshold { *left } else { *right };
        }
        i
    }

    pub fn predict(&self, theta: &Theta) -> f64 {
        match &self.nodes[self.route(theta)] {
            Node::Leaf(leaf) => dot(&leaf.weights, theta),
            Node::Split { .. } => unreachable!("route ends at a leaf"),
        }
    }

    fn learn(&mut self, theta: &Theta, h: f64, alpha: f64, params: &TreeParams) {
        let at = self.route(theta);
        let Node::Leaf(leaf) = &mut self.nodes[at] else { unreachable!("route ends at a leaf") };
        gradient_step(&mut leaf.weights, theta, h, alpha);
        leaf.seen += 1;
        if leaf.samples.len() == params.buffer.max(1) {
            leaf.samples.remove(0);
        }
        leaf.samples.push((*theta, h));
        let due = params.split_interval > 0 && leaf.seen % params.split_interval == 0;
        if due && leaf.depth < params.max_depth {
            self.try_split(at, alpha, params);
        }
    }

    fn try_split(&mut self, at: usize, alpha: f64, params: &TreeParams) {
        let Node::Leaf(leaf) = &self.nodes[at] else { return };
        let Some(choice) = best_split(&leaf.samples, params.min_leaf) else { return };
        let n = leaf.samples.len();
        let mean = leaf.samples.iter().map(|s| s.1).sum::<f64>() / n as f64;
        let parent_sse: f64 = leaf.samples.iter().map(|s| (s.1 - mean).powi(2)).sum();
        if choice.gain <= 1e-12 || choice.gain < params.min_gain * parent_sse {
            return;
        }
        let Node::Leaf(leaf) = std::mem::replace(&mut self.nodes[at], Node::Leaf(placeholder())) else {
            unreachable!()
        };
        let (left_samples, right_samples): (Vec<_>, Vec<_>) =
            leaf.samples.into_iter().partition(|(theta, _)| theta[choice.feature] <= choice.threshold);
        let child = |samples: Vec<(Theta, f64)>| {
            let mut weights = leaf.weights;
            for (theta, h) in &samples {
                gradient_step(&mut weights, theta, *h, alpha);
            }
            Node::Leaf(Leaf { weights, depth: leaf.depth + 1, seen: samples.len(), samples })
        };
        let left = self.nodes.len();
        self.nodes.push(child(left_samples));
        self.nodes.push(child(right_samples));
        self.nodes[at] = Node::Split { feature: choice.feature, threshold: choice.threshold, left, right: left + 1 };
    }
}

fn placeholder() -> Leaf {
    Leaf { weights: [0.0; THETA_LEN], depth: 0, seen: 0, samples: Vec::new() }
}

/// Human-reward model with one model tree per action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelTreeRewardModel {
    pub alpha: f64,
    pub params: TreeParams,
    trees: Vec<ModelTree>,
}

impl ModelTreeRewardModel {
    pub fn new(alpha: f64, params: TreeParams) -> Self {
        Self { alpha, params, trees: vec![ModelTree::default(); Action::COUNT] }
    }

    pub fn tree(&self, action: Action) -> &ModelTree {
        &self.trees[action.index()]
    }

    pub fn set_tree(&mut self, action: Action, tree: ModelTree) {
        self.trees[action.index()] = tree;
    }

    pub fn update(&mut self, sample: &CreditedSample) -> Result<f64> {
        check_sample(sample)?;
        let tree = &mut self.trees[sample.action.index()];
        let before = sample.h - tree.predict(&sample.theta);
        tree.learn(&sample.theta, sample.h, self.alpha, &self.params);
        Ok(before)
    }
}

impl RewardEstimate for ModelTreeRewardModel {
    fn predict(&self, theta: &Theta, action: Action) -> f64 {
        self.trees[action.index()].predict(theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_samples_means_no_split() {
        let samples: Vec<(Theta, f64)> = (0..30).map(|i| ([i as f64; THETA_LEN], i as f64)).collect();
        assert!(best_split(&samples, 20).is_none());
        let mut m = ModelTreeRewardModel::new(0.01, TreeParams::default());
        let a = Action::from_index(0).unwrap();
        for i in 0..19 {
            let mut theta = [0.0; THETA_LEN];
            theta[0] = (i % 2) as f64;
            theta[9] = 1.0;
            m.update(&CreditedSample { theta, action: a, h: if i % 2 == 0 { 1.0 } else { -5.0 } }).unwrap();
        }
        assert_eq!(m.tree(a).leaf_count(), 1);
    }

    #[test]
    fn split_separates_a_step_function() {
        let samples: Vec<(Theta, f64)> = (0..60)
            .map(|i| {
                let mut theta = [0.0; THETA_LEN];
                theta[3] = i as f64;
                (theta, if i < 30 { 1.0 } else { -1.0 })
            })
            .collect();
        let s = best_split(&samples, 10).unwrap();
        assert_eq!(s.feature, 3);
        assert_eq!(s.threshold, 29.5);
        assert!((s.gain - 60.0).abs() < 1e-9);
    }

    #[test]
    fn buffer_is_bounded() {
        let params = TreeParams { split_interval: 0, buffer: 5, ..TreeParams::default() };
        let mut tree = ModelTree::default();
        for i in 0..12 {
            tree.learn(&[i as f64 * 0.01; THETA_LEN], 1.0, 0.01, &params);
        }
        let Node::Leaf(leaf) = &tree.nodes()[0] else { panic!() };
        assert_eq!(leaf.samples.len(), 5);
        assert_eq!(leaf.seen, 12);
    }
}
