//! The human-reward learner: credit assignment, reward models, greedy
//! action choice and a value-iteration layer for tabular tasks.

pub mod credit;
pub mod linear;
pub mod tree;
pub mod vi;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use credit::{
    aggregate_labels, assign_credit, credit_for_span, CreditedSample, DelayPdf, FeedbackEvent, StepSpan,
    StepWindow, WindowStep, CREDIT_EPSILON,
};
pub use linear::LinearRewardModel;
pub use tree::{best_split, ModelTree, ModelTreeRewardModel, Node, SplitChoice, TreeParams};
pub use vi::{argmax, select_action_vi, state_values, vi_update, QTable, TabularMdp};

use crate::error::Result;
use crate::features::Theta;
use crate::sim::Action;

/// Anything that estimates the human reward of taking `action` in a state.
pub trait RewardEstimate {
    fn predict(&self, theta: &Theta, action: Action) -> f64;

    fn predict_all(&self, theta: &Theta) -> [f64; Action::COUNT] {
        let mut out = [0.0; Action::COUNT];
        for a in Action::all() {
            out[a.index()] = self.predict(theta, a);
        }
        out
    }
}

/// Greedy choice over all twelve actions, lowest index on ties.
pub fn select_action<M: RewardEstimate + ?Sized>(model: &M, theta: &Theta) -> Action {
    let idx = argmax(&model.predict_all(theta));
    Action::from_index(idx).expect("argmax stays within the action set")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Linear,
    #[default]
    Tree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub model: ModelKind,
    pub alpha: f64,
    pub tree: TreeParams,
    pub pdf: DelayPdf,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self { model: ModelKind::Tree, alpha: 0.002, tree: TreeParams::default(), pdf: DelayPdf::default() }
    }
}

impl LearnerConfig {
    pub fn build(&self) -> HumanRewardModel {
        match self.model {
            ModelKind::Linear => HumanRewardModel::Linear(LinearRewardModel::new(self.alpha)),
            ModelKind::Tree => HumanRewardModel::Tree(ModelTreeRewardModel::new(self.alpha, self.tree)),
        }
    }
}

const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    #[serde(flatten)]
    model: HumanRewardModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HumanRewardModel {
    Linear(LinearRewardModel),
    Tree(ModelTreeRewardModel),
}

impl HumanRewardModel {
    /// Learns from one credited sample; returns the error before the update.
    pub fn update(&mut self, sample: &CreditedSample) -> Result<f64> {
        match self {
            Self::Linear(m) => m.update(sample),
            Self::Tree(m) => m.update(sample),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDocument { version: MODEL_VERSION, model: self.clone() };
        serde_json::to_string(&doc).expect("models always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.version != MODEL_VERSION {
            return Err(crate::error::invalid(format!("unsupported model version {}", doc.version)));
        }
        Ok(doc.model)
    }

    /// Hex SHA-256 of the serialized model.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

impl RewardEstimate for HumanRewardModel {
    fn predict(&self, theta: &Theta, action: Action) -> f64 {
        match self {
            Self::Linear(m) => m.predict(theta, action),
            Self::Tree(m) => m.predict(theta, action),
        }
    }
}
