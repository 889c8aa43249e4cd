use serde::{Deserialize, Serialize};

use super::{argmax, check_dim, OnlineLearner};
use crate::error::{Error, Result};
use crate::sample::ClassId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PassiveAggressiveParams {
    /// Aggressiveness cap on the step size (PA-I).
    pub c: f64,
}

impl Default for PassiveAggressiveParams {
    fn default() -> Self {
        Self { c: 1.0 }
    }
}

impl PassiveAggressiveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Config("PA regularization C must be positive".into()));
        }
        Ok(())
    }
}

/// Step-size schedule for [`SgdParams`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearningRate {
    /// `eta0 / t^power_t`.
    InverseScaling,
    /// `1 / (alpha * (t0 + t))`, with `t0` from the usual typical-weight
    /// heuristic for the hinge loss.
    #[default]
    Optimal,
    /// `eta0` throughout.
    Constant,
}

/// Hinge-loss SGD with L2 shrinkage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SgdParams {
    pub learning_rate: LearningRate,
    pub eta0: f64,
    pub power_t: f64,
    /// L2 penalty strength.
    pub alpha: f64,
}

impl Default for SgdParams {
    fn default() -> Self {
        Self {
            learning_rate: LearningRate::Optimal,
            eta0: 0.01,
            power_t: 0.5,
            alpha: 1e-4,
        }
    }
}

impl SgdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0) || !(self.power_t >= 0.0) || !(self.alpha >= 0.0) {
            return Err(Error::Config(
                "SGD needs eta0 > 0, power_t >= 0 and alpha >= 0".into(),
            ));
        }
        if self.learning_rate == LearningRate::Optimal && self.alpha == 0.0 {
            return Err(Error::Config("the optimal schedule needs alpha > 0".into()));
        }
        Ok(())
    }

    /// Step size for the `t`-th update (1-based).
    pub fn eta(&self, t: u64) -> f64 {
        let t = t as f64;
        match self.learning_rate {
            LearningRate::InverseScaling => self.eta0 / t.powf(self.power_t),
            LearningRate::Constant => self.eta0,
            LearningRate::Optimal => {
                // For the hinge loss |dloss(-typw, 1)| = 1, so the initial
                // rate is the typical weight itself.
                let typw = (1.0 / self.alpha.sqrt()).sqrt();
                let t0 = 1.0 / (typw * self.alpha);
                1.0 / (self.alpha * (t0 + t - 1.0))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LinearLoss {
    /// Update by `y * x` on mistakes only.
    Perceptron,
    /// PA-I closed-form step.
    PassiveAggressive(PassiveAggressiveParams),
    Hinge(SgdParams),
}

/// Linear classifier trained one sample at a time.
///
/// Up to two classes a single scorer is kept, positive meaning class 1. Once a
/// third class shows up the model switches to one-vs-rest with one scorer per
/// class; the binary scorer becomes class 1's and its negation class 0's.
#[derive(Clone, Debug)]
pub struct LinearModel {
    loss: LinearLoss,
    dim: Option<usize>,
    n_classes: usize,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    steps: u64,
}

impl LinearModel {
    pub fn new(loss: LinearLoss) -> Self {
        Self {
            loss,
            dim: None,
            n_classes: 0,
            weights: Vec::new(),
            bias: Vec::new(),
            steps: 0,
        }
    }

    pub fn perceptron() -> Self {
        Self::new(LinearLoss::Perceptron)
    }

    pub fn passive_aggressive(params: PassiveAggressiveParams) -> Self {
        Self::new(LinearLoss::PassiveAggressive(params))
    }

    pub fn sgd(params: SgdParams) -> Self {
        Self::new(LinearLoss::Hinge(params))
    }

    /// Binary model with the given weights, as if trained on classes {0, 1}.
    pub fn with_binary_weights(loss: LinearLoss, weights: Vec<f64>, bias: f64) -> Self {
        Self {
            loss,
            dim: Some(weights.len()),
            n_classes: 2,
            weights: vec![weights],
            bias: vec![bias],
            steps: 0,
        }
    }

    /// Scorer weights and biases.
    pub fn coefficients(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.weights, &self.bias)
    }

    fn is_binary(&self) -> bool {
        self.n_classes <= 2
    }

    fn ensure_classes(&mut self, dim: usize, label: ClassId) {
        let needed = label + 1;
        if needed <= self.n_classes {
            return;
        }
        if self.weights.is_empty() {
            self.weights.push(vec![0.0; dim]);
            self.bias.push(0.0);
        }
        if needed > 2 {
            if self.is_binary() {
                let w = self.weights.pop().expect("binary scorer");
                let b = self.bias.pop().expect("binary bias");
                self.weights = vec![w.iter().map(|v| -v).collect(), w];
                self.bias = vec![-b, b];
            }
            self.weights.resize(needed, vec![0.0; dim]);
            self.bias.resize(needed, 0.0);
        }
        self.n_classes = needed;
    }

    fn score(w: &[f64], b: f64, x: &[f64]) -> f64 {
        w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b
    }

    fn update(loss: &LinearLoss, w: &mut [f64], b: &mut f64, x: &[f64], y: f64, eta: f64) {
        let margin = y * Self::score(w, *b, x);
        let step = match loss {
            LinearLoss::Perceptron => {
                if margin > 0.0 {
                    return;
                }
                y
            }
            LinearLoss::PassiveAggressive(p) => {
                let hinge = 1.0 - margin;
                let norm: f64 = x.iter().map(|v| v * v).sum();
                if hinge <= 0.0 || norm == 0.0 {
                    return;
                }
                y * p.c.min(hinge / norm)
            }
            LinearLoss::Hinge(p) => {
                if p.alpha > 0.0 {
                    let shrink = 1.0 - eta * p.alpha;
                    w.iter_mut().for_each(|v| *v *= shrink);
                }
                if margin >= 1.0 {
                    return;
                }
                eta * y
            }
        };
        for (wi, xi) in w.iter_mut().zip(x) {
            *wi += step * xi;
        }
        *b += step;
    }
}

impl OnlineLearner for LinearModel {
    fn predict_one(&self, x: &[f64]) -> Result<ClassId> {
        let dim = self.dim.ok_or(Error::Untrained)?;
        check_dim(dim, x)?;
        if self.is_binary() {
            let s = Self::score(&self.weights[0], self.bias[0], x);
            Ok(usize::from(s > 0.0))
        } else {
            let scores = self
                .weights
                .iter()
                .zip(&self.bias)
                .map(|(w, &b)| Self::score(w, b, x));
            Ok(argmax(scores).expect("at least three scorers"))
        }
    }

    fn train_one(&mut self, x: &[f64], label: ClassId) -> Result<()> {
        let dim = self.dim.unwrap_or(x.len());
        check_dim(dim, x)?;
        self.dim = Some(dim);
        self.ensure_classes(dim, label);
        self.steps += 1;
        let eta = match &self.loss {
            LinearLoss::Hinge(p) => p.eta(self.steps),
            _ => 1.0,
        };
        if self.is_binary() {
            let y = if label == 1 { 1.0 } else { -1.0 };
            Self::update(
                &self.loss,
                &mut self.weights[0],
                &mut self.bias[0],
                x,
                y,
                eta,
            );
        } else {
            for (k, (w, b)) in self.weights.iter_mut().zip(&mut self.bias).enumerate() {
                let y = if k == label { 1.0 } else { -1.0 };
                Self::update(&self.loss, w, b, x, y, eta);
            }
        }
        Ok(())
    }

    fn reset(&mut self) {
        *self = Self::new(self.loss.clone());
    }
}
