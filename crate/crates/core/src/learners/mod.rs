//! Small base classifiers with randomly sampled hyperparameters.

mod bayes;
mod knn;
mod tree;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::types::ScoreVector;

pub use bayes::{FeatureModel, NaiveBayes};
pub use knn::Knn;
pub use tree::Node;

pub const MIN_TREE_DEPTH: usize = 5;
pub const MAX_TREE_DEPTH: usize = 25;
pub const MAX_KNN_K: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    DecisionTree,
    NaiveBayes,
    Knn,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 3] = [LearnerKind::DecisionTree, LearnerKind::NaiveBayes, LearnerKind::Knn];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    pub dt_criterion: Criterion,
    pub dt_max_depth: usize,
    pub knn_k: usize,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        // sampled depths lie in [MIN_TREE_DEPTH, MAX_TREE_DEPTH]; hand-built
        // configs may go shallower
        if self.kind == LearnerKind::DecisionTree && !(1..=MAX_TREE_DEPTH).contains(&self.dt_max_depth) {
            return invalid(format!("tree depth {} outside [1, {MAX_TREE_DEPTH}]", self.dt_max_depth));
        }
        if self.kind == LearnerKind::Knn && self.knn_k == 0 {
            return invalid("knn needs k >= 1");
        }
        Ok(())
    }
}

/// `floor(e^x)` with `x` uniform on `[ln lo, ln hi]`, clamped to `[lo, hi]`.
pub fn sample_geometric(lo: usize, hi: usize, rng: &mut impl Rng) -> Result<usize> {
    if lo == 0 || lo > hi {
        return invalid(format!("geometric range [{lo}, {hi}] needs 1 <= lo <= hi"));
    }
    if lo == hi {
        return Ok(lo);
    }
    let x = rng.gen_range((lo as f64).ln()..=(hi as f64).ln());
    Ok((x.exp().floor() as usize).clamp(lo, hi))
}

/// Draws a learner type and its hyperparameters.
pub fn sample_learner_config(rng: &mut impl Rng) -> LearnerConfig {
    let kind = LearnerKind::ALL[rng.gen_range(0..LearnerKind::ALL.len())];
    let dt_criterion = if rng.gen_bool(0.5) {
        Criterion::Gini
    } else {
        Criterion::Entropy
    };
    let dt_max_depth = rng.gen_range(MIN_TREE_DEPTH..=MAX_TREE_DEPTH);
    let knn_k = sample_geometric(1, MAX_KNN_K, rng).expect("valid range");
    LearnerConfig {
        kind,
        dt_criterion,
        dt_max_depth,
        knn_k,
        seed: rng.gen(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Tree(Node),
    NaiveBayes(NaiveBayes),
    Knn(Knn),
}

/// A fitted base classifier; immutable after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub config: LearnerConfig,
    pub model: Model,
    pub validation_accuracy: f64,
    pub m: usize,
    pub width: usize,
}

/// Fits a classifier on `train` and records its accuracy on `validation`
/// (on `train` when the validation set is empty).
pub fn train(config: &LearnerConfig, train: &Dataset, validation: &Dataset) -> Result<TrainedClassifier> {
    config.validate()?;
    if train.is_empty() {
        return invalid("training set is empty");
    }
    if !train.same_schema(validation) {
        return invalid("training and validation sets have different schemas");
    }
    let m = train.m();
    let model = match config.kind {
        LearnerKind::DecisionTree => {
            let idx: Vec<usize> = (0..train.len()).collect();
            let builder = tree::TreeBuilder::new(
                &train.rows,
                &train.labels,
                m,
                config.dt_criterion,
                config.dt_max_depth,
                config.seed,
            );
            Model::Tree(builder.build(&idx, 0))
        }
        LearnerKind::NaiveBayes => Model::NaiveBayes(NaiveBayes::fit(&train.features, &train.rows, &train.labels, m)),
        LearnerKind::Knn => Model::Knn(Knn::fit(&train.features, &train.rows, &train.labels, m, config.knn_k)),
    };
    let mut clf = TrainedClassifier {
        config: config.clone(),
        model,
        validation_accuracy: 0.0,
        m,
        width: train.features.len(),
    };
    let scored = if validation.is_empty() { train } else { validation };
    clf.validation_accuracy = clf.accuracy(scored)?;
    Ok(clf)
}

impl TrainedClassifier {
    pub fn predict_proba(&self, sample: &[f64]) -> Result<ScoreVector> {
        if sample.len() != self.width {
            return invalid(format!(
                "sample has {} features, classifier expects {}",
                sample.len(),
                self.width
            ));
        }
        let probs = match &self.model {
            Model::Tree(root) => {
                let counts = root.leaf_counts(sample);
                let total: usize = counts.iter().sum();
                counts.iter().map(|&c| c as f64 / total as f64).collect()
            }
            Model::NaiveBayes(nb) => nb.posterior(sample),
            Model::Knn(knn) => knn.shares(sample),
        };
        ScoreVector::probabilities(probs)
    }

    pub fn predict(&self, sample: &[f64]) -> Result<usize> {
        Ok(self.predict_proba(sample)?.argmax())
    }

    /// Fraction of `data` classified correctly.
    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return invalid("cannot score an empty dataset");
        }
        let mut correct = 0usize;
        for (row, &label) in data.rows.iter().zip(&data.labels) {
            correct += usize::from(self.predict(row)? == label);
        }
        Ok(correct as f64 / data.len() as f64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("classifier serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
