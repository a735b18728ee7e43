use serde::{Deserialize, Serialize};

use super::credit::CreditedSample;
use super::RewardEstimate;
use crate::error::{invalid, Error, Result};
use crate::features::{Theta, THETA_LEN};
use crate::sim::Action;

/// Human-reward model linear in the features, one weight block per action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRewardModel {
    pub alpha: f64,
    weights: Vec<Theta>,
}

pub(crate) fn dot(w: &Theta, theta: &Theta) -> f64 {
    w.iter().zip(theta).map(|(a, b)| a * b).sum()
}

pub(crate) fn check_sample(sample: &CreditedSample) -> Result<()> {
    if !sample.h.is_finite() {
        return Err(Error::NonFinite("label"));
    }
    if sample.theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature vector"));
    }
    if sample.h == 0.0 {
        return Err(invalid("zero labels are never learned from"));
    }
    Ok(())
}

/// One least-squares gradient step toward `h`; returns the error before the step.
pub(crate) fn gradient_step(w: &mut Theta, theta: &Theta, h: f64, alpha: f64) -> f64 {
    let delta = h - dot(w, theta);
    for (wi, xi) in w.iter_mut().zip(theta) {
        *wi += alpha * delta * xi;
    }
    delta
}

impl LinearRewardModel {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, weights: vec![[0.0; THETA_LEN]; Action::COUNT] }
    }

    pub fn weights(&self, action: Action) -> &Theta {
        &self.weights[action.index()]
    }

    pub fn set_weights(&mut self, action: Action, w: Theta) {
        self.weights[action.index()] = w;
    }

    /// `w[a] += alpha * (h - w[a].theta) * theta`; other actions untouched.
    pub fn update(&mut self, sample: &CreditedSample) -> Result<f64> {
        check_sample(sample)?;
        let alpha = self.alpha;
        Ok(gradient_step(&mut self.weights[sample.action.index()], &sample.theta, sample.h, alpha))
    }
}

impl RewardEstimate for LinearRewardModel {
    fn predict(&self, theta: &Theta, action: Action) -> f64 {
        dot(&self.weights[action.index()], theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(theta: Theta, action: usize, h: f64) -> CreditedSample {
        CreditedSample { theta, action: Action::from_index(action).unwrap(), h }
    }

    #[test]
    fn zero_model_predicts_zero() {
        let m = LinearRewardModel::new(0.1);
        let theta = [1.5; THETA_LEN];
        assert!(Action::all().all(|a| m.predict(&theta, a) == 0.0));
    }

    #[test]
    fn unit_weight_reads_feature() {
        let mut m = LinearRewardModel::new(0.1);
        let a = Action::from_index(4).unwrap();
        let mut w = [0.0; THETA_LEN];
        w[7] = 1.0;
        m.set_weights(a, w);
        let mut theta = [0.0; THETA_LEN];
        theta[7] = 3.0;
        assert_eq!(m.predict(&theta, a), 3.0);
    }

    #[test]
    fn one_step_on_unit_vector() {
        let mut m = LinearRewardModel::new(0.1);
        let mut theta = [0.0; THETA_LEN];
        theta[5] = 1.0;
        m.update(&sample(theta, 2, 1.0)).unwrap();
        let w = m.weights(Action::from_index(2).unwrap());
        assert!((w[5] - 0.1).abs() < 1e-15);
        assert_eq!(w.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn exact_prediction_is_a_fixed_point() {
        let mut m = LinearRewardModel::new(0.1);
        let mut theta = [0.0; THETA_LEN];
        theta[0] = 1.0;
        m.update(&sample(theta, 0, 1.0)).unwrap();
        let before = m.clone();
        let pred = m.predict(&theta, Action::from_index(0).unwrap());
        m.update(&sample(theta, 0, pred)).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn other_actions_untouched() {
        let mut m = LinearRewardModel::new(0.05);
        let theta = [0.3; THETA_LEN];
        m.update(&sample(theta, 3, -1.0)).unwrap();
        for a in Action::all().filter(|a| a.index() != 3) {
            assert_eq!(m.weights(a), &[0.0; THETA_LEN]);
        }
    }

    #[test]
    fn rejects_non_finite_and_zero() {
        let mut m = LinearRewardModel::new(0.05);
        let mut theta = [0.0; THETA_LEN];
        assert!(matches!(m.update(&sample(theta, 0, f64::NAN)), Err(Error::NonFinite(_))));
        assert!(m.update(&sample(theta, 0, 0.0)).is_err());
        theta[3] = f64::INFINITY;
        assert!(matches!(m.update(&sample(theta, 0, 1.0)), Err(Error::NonFinite(_))));
        assert_eq!(m, LinearRewardModel::new(0.05));
    }
}
