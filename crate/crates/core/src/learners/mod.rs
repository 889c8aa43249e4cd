//! Incremental classifiers behind a single train-one/predict-one contract.

mod hoeffding;
mod knn;
mod linear;
mod naive_bayes;

pub use hoeffding::{HoeffdingTree, HoeffdingTreeParams};
pub use knn::{Knn, KnnParams};
pub use linear::{LearningRate, LinearLoss, LinearModel, PassiveAggressiveParams, SgdParams};
pub use naive_bayes::{GaussianNb, GaussianNbParams, MultinomialNb, MultinomialNbParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::ClassId;

/// A classifier that learns one sample at a time.
pub trait OnlineLearner: Send {
    /// Predicts a class for `x`. Fails with [`Error::Untrained`] before the
    /// first call to [`train_one`](Self::train_one).
    fn predict_one(&self, x: &[f64]) -> Result<ClassId>;

    fn train_one(&mut self, x: &[f64], label: ClassId) -> Result<()>;

    /// Restores the post-construction state.
    fn reset(&mut self);
}

/// Learner family and hyperparameters, as written in experiment files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LearnerKind {
    Knn(#[serde(default)] KnnParams),
    GaussianNb(#[serde(default)] GaussianNbParams),
    MultinomialNb(#[serde(default)] MultinomialNbParams),
    Perceptron,
    PassiveAggressive(#[serde(default)] PassiveAggressiveParams),
    Sgd(#[serde(default)] SgdParams),
    HoeffdingTree(#[serde(default)] HoeffdingTreeParams),
}

impl LearnerKind {
    /// Short name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Knn(_) => "KNN",
            LearnerKind::GaussianNb(_) => "GNB",
            LearnerKind::MultinomialNb(_) => "MNB",
            LearnerKind::Perceptron => "Perceptron",
            LearnerKind::PassiveAggressive(_) => "PA",
            LearnerKind::Sgd(_) => "SGD",
            LearnerKind::HoeffdingTree(_) => "HT",
        }
    }

    /// All seven learners with default hyperparameters.
    pub fn all_defaults() -> Vec<LearnerKind> {
        vec![
            LearnerKind::Knn(KnnParams::default()),
            LearnerKind::HoeffdingTree(HoeffdingTreeParams::default()),
            LearnerKind::MultinomialNb(MultinomialNbParams::default()),
            LearnerKind::GaussianNb(GaussianNbParams::default()),
            LearnerKind::Sgd(SgdParams::default()),
            LearnerKind::Perceptron,
            LearnerKind::PassiveAggressive(PassiveAggressiveParams::default()),
        ]
    }

    pub fn requires_non_negative(&self) -> bool {
        matches!(self, LearnerKind::MultinomialNb(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerKind::Knn(p) => p.validate(),
            LearnerKind::GaussianNb(p) => p.validate(),
            LearnerKind::MultinomialNb(p) => p.validate(),
            LearnerKind::Perceptron => Ok(()),
            LearnerKind::PassiveAggressive(p) => p.validate(),
            LearnerKind::Sgd(p) => p.validate(),
            LearnerKind::HoeffdingTree(p) => p.validate(),
        }
    }

    pub fn build(&self) -> Result<Box<dyn OnlineLearner>> {
        self.validate()?;
        Ok(match self {
            LearnerKind::Knn(p) => Box::new(Knn::new(p.clone())),
            LearnerKind::GaussianNb(p) => Box::new(GaussianNb::new(p.clone())),
            LearnerKind::MultinomialNb(p) => Box::new(MultinomialNb::new(p.clone())),
            LearnerKind::Perceptron => Box::new(LinearModel::perceptron()),
            LearnerKind::PassiveAggressive(p) => {
                Box::new(LinearModel::passive_aggressive(p.clone()))
            }
            LearnerKind::Sgd(p) => Box::new(LinearModel::sgd(p.clone())),
            LearnerKind::HoeffdingTree(p) => Box::new(HoeffdingTree::new(p.clone())),
        })
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if expected != x.len() {
        return Err(Error::Dimension {
            feature: expected.min(x.len()),
            expected,
            actual: x.len(),
        });
    }
    Ok(())
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}
