use serde::{Deserialize, Serialize};

use super::{argmax, check_dim, OnlineLearner};
use crate::error::{Error, Result};
use crate::sample::ClassId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianNbParams {
    /// Fraction of the largest per-feature variance added to every class
    /// variance.
    pub var_smoothing: f64,
}

impl Default for GaussianNbParams {
    fn default() -> Self {
        Self {
            var_smoothing: 1e-9,
        }
    }
}

impl GaussianNbParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.var_smoothing > 0.0) {
            return Err(Error::Config("var_smoothing must be positive".into()));
        }
        Ok(())
    }
}

/// Welford accumulator over a fixed number of features.
#[derive(Clone, Debug, Default)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *m;
            *m += delta / self.count;
            *s += delta * (v - *m);
        }
    }

    /// Population variance of feature `j`.
    fn variance(&self, j: usize) -> f64 {
        if self.count > 0.0 {
            self.m2[j] / self.count
        } else {
            0.0
        }
    }
}

/// Gaussian naive Bayes with one-pass per-class means and variances.
#[derive(Clone, Debug)]
pub struct GaussianNb {
    params: GaussianNbParams,
    dim: Option<usize>,
    overall: Moments,
    classes: Vec<Moments>,
}

impl GaussianNb {
    pub fn new(params: GaussianNbParams) -> Self {
        Self {
            params,
            dim: None,
            overall: Moments::default(),
            classes: Vec::new(),
        }
    }

    /// `(count, means, population variances)` for a class, if seen.
    pub fn class_moments(&self, class: ClassId) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let m = self.classes.get(class).filter(|m| m.count > 0.0)?;
        let var = (0..m.mean.len()).map(|j| m.variance(j)).collect();
        Some((m.count, m.mean.clone(), var))
    }

    fn epsilon(&self) -> f64 {
        let max_var = (0..self.overall.mean.len())
            .map(|j| self.overall.variance(j))
            .fold(0.0, f64::max);
        if max_var > 0.0 {
            self.params.var_smoothing * max_var
        } else {
            self.params.var_smoothing
        }
    }

    /// Joint log-likelihood per class (`None` for unseen classes).
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Result<Vec<Option<f64>>> {
        let dim = self.dim.ok_or(Error::Untrained)?;
        check_dim(dim, x)?;
        let eps = self.epsilon();
        let total = self.overall.count;
        Ok(self
            .classes
            .iter()
            .map(|m| {
                (m.count > 0.0).then(|| {
                    let mut ll = (m.count / total).ln();
                    for (j, &v) in x.iter().enumerate() {
                        let var = m.variance(j) + eps;
                        let d = v - m.mean[j];
                        ll -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + d * d / var);
                    }
                    ll
                })
            })
            .collect())
    }
}

impl OnlineLearner for GaussianNb {
    fn predict_one(&self, x: &[f64]) -> Result<ClassId> {
        let ll = self.joint_log_likelihood(x)?;
        Ok(argmax(ll.into_iter().map(|l| l.unwrap_or(f64::NEG_INFINITY))).expect("trained"))
    }

    fn train_one(&mut self, x: &[f64], label: ClassId) -> Result<()> {
        let dim = *self.dim.get_or_insert(x.len());
        check_dim(dim, x)?;
        if self.overall.mean.is_empty() && dim > 0 {
            self.overall = Moments::new(dim);
        }
        if self.classes.len() <= label {
            self.classes.resize_with(label + 1, || Moments::new(dim));
        }
        self.overall.push(x);
        self.classes[label].push(x);
        Ok(())
    }

    fn reset(&mut self) {
        *self = Self::new(self.params.clone());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultinomialNbParams {
    /// Additive (Laplace/Lidstone) smoothing.
    pub alpha: f64,
    /// Use empirical class priors; uniform otherwise. Off by default: the
    /// per-class likelihoods of encoded samples differ only slightly, so on
    /// imbalanced streams a fitted prior swamps them and the model predicts
    /// the majority class throughout.
    pub fit_prior: bool,
}

impl Default for MultinomialNbParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            fit_prior: false,
        }
    }
}

impl MultinomialNbParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        Ok(())
    }
}

/// Multinomial naive Bayes over non-negative feature "counts".
#[derive(Clone, Debug)]
pub struct MultinomialNb {
    params: MultinomialNbParams,
    dim: Option<usize>,
    total: f64,
    class_count: Vec<f64>,
    feature_count: Vec<Vec<f64>>,
}

impl MultinomialNb {
    pub fn new(params: MultinomialNbParams) -> Self {
        Self {
            params,
            dim: None,
            total: 0.0,
            class_count: Vec::new(),
            feature_count: Vec::new(),
        }
    }

    fn check_non_negative(x: &[f64]) -> Result<()> {
        match x.iter().position(|&v| !(v >= 0.0)) {
            Some(feature) => Err(Error::NegativeFeature {
                feature,
                value: x[feature],
            }),
            None => Ok(()),
        }
    }

    /// Unnormalised log posterior per class (`None` for unseen classes).
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Result<Vec<Option<f64>>> {
        let dim = self.dim.ok_or(Error::Untrained)?;
        check_dim(dim, x)?;
        Self::check_non_negative(x)?;
        let seen = self.class_count.iter().filter(|&&c| c > 0.0).count() as f64;
        let alpha = self.params.alpha;
        Ok(self
            .class_count
            .iter()
            .zip(&self.feature_count)
            .map(|(&count, features)| {
                (count > 0.0).then(|| {
                    let prior = if self.params.fit_prior {
                        (count / self.total).ln()
                    } else {
                        -seen.ln()
                    };
                    let denom = (features.iter().sum::<f64>() + alpha * dim as f64).ln();
                    prior
                        + features
                            .iter()
                            .zip(x)
                            .map(|(&n, &v)| v * ((n + alpha).ln() - denom))
                            .sum::<f64>()
                })
            })
            .collect())
    }
}

impl OnlineLearner for MultinomialNb {
    fn predict_one(&self, x: &[f64]) -> Result<ClassId> {
        let ll = self.joint_log_likelihood(x)?;
        Ok(argmax(ll.into_iter().map(|l| l.unwrap_or(f64::NEG_INFINITY))).expect("trained"))
    }

    fn train_one(&mut self, x: &[f64], label: ClassId) -> Result<()> {
        let dim = self.dim.unwrap_or(x.len());
        check_dim(dim, x)?;
        Self::check_non_negative(x)?;
        self.dim = Some(dim);
        if self.class_count.len() <= label {
            self.class_count.resize(label + 1, 0.0);
            self.feature_count.resize_with(label + 1, || vec![0.0; dim]);
        }
        self.total += 1.0;
        self.class_count[label] += 1.0;
        for (n, &v) in self.feature_count[label].iter_mut().zip(x) {
            *n += v;
        }
        Ok(())
    }

    fn reset(&mut self) {
        *self = Self::new(self.params.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch_moments(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
        let n = rows.len() as f64;
        let d = rows[0].len();
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let var = (0..d)
            .map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n)
            .collect();
        (mean, var)
    }

    #[test]
    fn gaussian_picks_the_closer_class() {
        let mut m = GaussianNb::new(GaussianNbParams::default());
        for _ in 0..5 {
            m.train_one(&[0.0, 0.0, 0.0], 0).unwrap();
            m.train_one(&[10.0, 10.0, 10.0], 1).unwrap();
        }
        // Both class variances are zero, so only the smoothing term
        // (1e-9 * overall variance 25) remains:
        //   class 0: -3 * 1^2 / (2 * 2.5e-8)  = -6e7
        //   class 1: -3 * 9^2 / (2 * 2.5e-8)  = -4.86e9
        let ll = m.joint_log_likelihood(&[1.0, 1.0, 1.0]).unwrap();
        let (l0, l1) = (ll[0].unwrap(), ll[1].unwrap());
        let norm = -1.5 * (2.0 * std::f64::consts::PI * 2.5e-8).ln() + 0.5f64.ln();
        assert!((l0 - (norm - 6e7)).abs() < 1e-3 * 6e7);
        assert!((l1 - (norm - 4.86e9)).abs() < 1e-3 * 4.86e9);
        assert_eq!(m.predict_one(&[1.0, 1.0, 1.0]).unwrap(), 0);
    }

    #[test]
    fn gaussian_moments_match_two_pass() {
        let mut m = GaussianNb::new(GaussianNbParams::default());
        let mut rows = vec![Vec::new(), Vec::new()];
        let mut state = 12345u64;
        for i in 0..500 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let a = (state >> 11) as f64 / (1u64 << 53) as f64;
            let x = vec![1e3 + a, -a * 7.0, (i as f64).sin()];
            let y = i % 2;
            m.train_one(&x, y).unwrap();
            rows[y].push(x);
            if i > 10 {
                for c in 0..2 {
                    let (mean, var) = batch_moments(&rows[c]);
                    let (_, m_mean, m_var) = m.class_moments(c).unwrap();
                    for j in 0..3 {
                        assert!((m_mean[j] - mean[j]).abs() <= 1e-9 * mean[j].abs().max(1e-300));
                        assert!((m_var[j] - var[j]).abs() <= 1e-9 * var[j].abs().max(1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn multinomial_rejects_negative_features() {
        let mut m = MultinomialNb::new(MultinomialNbParams::default());
        assert!(matches!(
            m.train_one(&[1.0, -0.5], 0),
            Err(Error::NegativeFeature { feature: 1, .. })
        ));
        m.train_one(&[1.0, 0.5], 0).unwrap();
        assert!(m.predict_one(&[-1.0, 0.0]).is_err());
    }

    #[test]
    fn multinomial_prefers_matching_profile() {
        let mut m = MultinomialNb::new(MultinomialNbParams::default());
        for _ in 0..10 {
            m.train_one(&[5.0, 0.0, 1.0], 0).unwrap();
            m.train_one(&[0.0, 5.0, 1.0], 1).unwrap();
        }
        assert_eq!(m.predict_one(&[3.0, 0.0, 0.0]).unwrap(), 0);
        assert_eq!(m.predict_one(&[0.0, 3.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn multinomial_posteriors_stay_finite() {
        let mut m = MultinomialNb::new(MultinomialNbParams::default());
        for _ in 0..50 {
            m.train_one(&[1.0, 0.0], 0).unwrap();
        }
        m.train_one(&[0.0, 0.0], 1).unwrap();
        let ll = m.joint_log_likelihood(&[0.0, 100.0]).unwrap();
        assert!(ll.iter().all(|l| l.unwrap().is_finite()));
    }

    #[test]
    fn multinomial_hand_computed_likelihood() {
        let mut m = MultinomialNb::new(MultinomialNbParams {
            alpha: 1.0,
            fit_prior: true,
        });
        m.train_one(&[2.0, 1.0], 0).unwrap();
        m.train_one(&[0.0, 1.0], 1).unwrap();
        m.train_one(&[0.0, 3.0], 1).unwrap();
        // class 0: prior 1/3, theta = (3/5, 2/5); class 1: prior 2/3, theta = (1/6, 5/6)
        let ll = m.joint_log_likelihood(&[1.0, 2.0]).unwrap();
        let want0 = (1.0f64 / 3.0).ln() + (3.0f64 / 5.0).ln() + 2.0 * (2.0f64 / 5.0).ln();
        let want1 = (2.0f64 / 3.0).ln() + (1.0f64 / 6.0).ln() + 2.0 * (5.0f64 / 6.0).ln();
        assert!((ll[0].unwrap() - want0).abs() < 1e-12);
        assert!((ll[1].unwrap() - want1).abs() < 1e-12);
    }

    #[test]
    fn multinomial_uniform_prior_by_default() {
        let mut m = MultinomialNb::new(MultinomialNbParams::default());
        m.train_one(&[2.0, 1.0], 0).unwrap();
        m.train_one(&[0.0, 1.0], 1).unwrap();
        m.train_one(&[0.0, 3.0], 1).unwrap();
        let ll = m.joint_log_likelihood(&[1.0, 2.0]).unwrap();
        let want0 = 0.5f64.ln() + (3.0f64 / 5.0).ln() + 2.0 * (2.0f64 / 5.0).ln();
        assert!((ll[0].unwrap() - want0).abs() < 1e-12);
    }
}
