//! Hoeffding tree (VFDT) for numeric attributes.
//!
//! Leaves keep a Gaussian summary per (attribute, class). Every
//! `grace_period` samples a leaf scores binary splits at evenly spaced
//! thresholds by information gain and splits when the best candidate beats the
//! runner-up by more than the Hoeffding bound, or when the bound has shrunk
//! below the tie threshold.

use serde::{Deserialize, Serialize};

use super::{argmax, check_dim, OnlineLearner};
use crate::error::{Error, Result};
use crate::sample::ClassId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoeffdingTreeParams {
    pub grace_period: usize,
    /// Allowed probability of choosing the wrong split attribute.
    pub split_confidence: f64,
    pub tie_threshold: f64,
    /// Candidate thresholds per attribute.
    pub n_split_points: usize,
    /// Each branch of a split must hold at least this fraction of the weight.
    pub min_branch_fraction: f64,
}

impl Default for HoeffdingTreeParams {
    fn default() -> Self {
        Self {
            grace_period: 200,
            split_confidence: 1e-7,
            tie_threshold: 0.05,
            n_split_points: 10,
            min_branch_fraction: 0.01,
        }
    }
}

impl HoeffdingTreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.grace_period == 0 || self.n_split_points == 0 {
            return Err(Error::Config(
                "grace_period and n_split_points must be positive".into(),
            ));
        }
        if !(self.split_confidence > 0.0 && self.split_confidence < 1.0) {
            return Err(Error::Config("split_confidence must lie in (0, 1)".into()));
        }
        if !(self.tie_threshold >= 0.0) || !(0.0..0.5).contains(&self.min_branch_fraction) {
            return Err(Error::Config(
                "tie_threshold must be >= 0 and min_branch_fraction in [0, 0.5)".into(),
            ));
        }
        Ok(())
    }
}

/// `sqrt(R^2 ln(1/delta) / (2n))`.
pub fn hoeffding_bound(range: f64, confidence: f64, n: f64) -> f64 {
    (range * range * (1.0 / confidence).ln() / (2.0 * n)).sqrt()
}

pub(crate) fn entropy(dist: &[f64]) -> f64 {
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -dist
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Information gain of partitioning `parent` into `branches`; `None` when
/// fewer than two branches carry `min_fraction` of the weight.
pub(crate) fn info_gain(parent: &[f64], branches: &[Vec<f64>], min_fraction: f64) -> Option<f64> {
    let total: f64 = branches.iter().flatten().sum();
    if total <= 0.0 {
        return None;
    }
    let big = branches
        .iter()
        .filter(|b| b.iter().sum::<f64>() / total > min_fraction)
        .count();
    if big < 2 {
        return None;
    }
    let children: f64 = branches
        .iter()
        .map(|b| b.iter().sum::<f64>() / total * entropy(b))
        .sum();
    Some(entropy(parent) - children)
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[derive(Clone, Debug, Default)]
struct ClassGaussian {
    weight: f64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl ClassGaussian {
    fn push(&mut self, x: f64) {
        if self.weight == 0.0 {
            self.min = x;
            self.max = x;
        } else {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
        self.weight += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.weight;
        self.m2 += delta * (x - self.mean);
    }

    fn std_dev(&self) -> f64 {
        if self.weight > 1.0 {
            (self.m2 / (self.weight - 1.0)).max(0.0).sqrt()
        } else {
            0.0
        }
    }

    /// Estimated weight at or below `t`.
    fn weight_at_or_below(&self, t: f64) -> f64 {
        if self.weight == 0.0 || t < self.min {
            0.0
        } else if t >= self.max {
            self.weight
        } else {
            let sd = self.std_dev();
            if sd > 0.0 {
                self.weight * normal_cdf((t - self.mean) / sd)
            } else if t >= self.mean {
                self.weight
            } else {
                0.0
            }
        }
    }
}

/// Per-attribute class-conditional Gaussian summaries.
#[derive(Clone, Debug, Default)]
struct AttributeObserver {
    classes: Vec<ClassGaussian>,
}

impl AttributeObserver {
    fn push(&mut self, x: f64, label: ClassId) {
        if self.classes.len() <= label {
            self.classes.resize_with(label + 1, ClassGaussian::default);
        }
        self.classes[label].push(x);
    }

    fn range(&self) -> Option<(f64, f64)> {
        self.classes
            .iter()
            .filter(|c| c.weight > 0.0)
            .fold(None, |acc, c| match acc {
                None => Some((c.min, c.max)),
                Some((lo, hi)) => Some((lo.min(c.min), hi.max(c.max))),
            })
    }

    /// Best `(gain, threshold, left dist, right dist)` over the candidate
    /// thresholds.
    fn best_split(
        &self,
        parent: &[f64],
        n_points: usize,
        min_fraction: f64,
    ) -> Option<(f64, f64, Vec<f64>, Vec<f64>)> {
        let (lo, hi) = self.range()?;
        if !(hi > lo) {
            return None;
        }
        let mut best: Option<(f64, f64, Vec<f64>, Vec<f64>)> = None;
        for k in 1..=n_points {
            let t = lo + (hi - lo) * k as f64 / (n_points + 1) as f64;
            let mut left = vec![0.0; parent.len()];
            let mut right = vec![0.0; parent.len()];
            for (c, g) in self.classes.iter().enumerate() {
                let l = g.weight_at_or_below(t);
                left[c] = l;
                right[c] = g.weight - l;
            }
            let branches = [left, right];
            if let Some(gain) = info_gain(parent, &branches, min_fraction) {
                if best.as_ref().is_none_or(|b| gain > b.0) {
                    let [left, right] = branches;
                    best = Some((gain, t, left, right));
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
struct Leaf {
    class_counts: Vec<f64>,
    observers: Vec<AttributeObserver>,
    weight_at_last_attempt: f64,
}

impl Leaf {
    fn new(dim: usize, class_counts: Vec<f64>) -> Self {
        let weight_at_last_attempt = class_counts.iter().sum();
        Self {
            class_counts,
            observers: vec![AttributeObserver::default(); dim],
            weight_at_last_attempt,
        }
    }

    fn weight(&self) -> f64 {
        self.class_counts.iter().sum()
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(Leaf),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
pub struct HoeffdingTree {
    params: HoeffdingTreeParams,
    dim: Option<usize>,
    nodes: Vec<Node>,
}

impl HoeffdingTree {
    pub fn new(params: HoeffdingTreeParams) -> Self {
        Self {
            params,
            dim: None,
            nodes: Vec::new(),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }

    /// Attribute tested at the root, if the root has split.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            Node::Leaf(_) => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(_) => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    fn attempt_split(&mut self, index: usize) {
        let Node::Leaf(leaf) = &self.nodes[index] else {
            return;
        };
        let parent = &leaf.class_counts;
        if parent.iter().filter(|&&c| c > 0.0).count() < 2 {
            return;
        }
        let p = &self.params;
        let mut candidates: Vec<(f64, usize, f64, Vec<f64>, Vec<f64>)> = leaf
            .observers
            .iter()
            .enumerate()
            .filter_map(|(f, obs)| {
                obs.best_split(parent, p.n_split_points, p.min_branch_fraction)
                    .map(|(g, t, l, r)| (g, f, t, l, r))
            })
            .collect();
        if candidates.is_empty() {
            return;
        }
        // Stable: among equal gains the lowest attribute index wins.
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
        let best_gain = candidates[0].0;
        // Not splitting has zero gain and always competes.
        let second_gain = candidates.get(1).map_or(0.0, |c| c.0.max(0.0));
        let n_classes = parent.len().max(2) as f64;
        let eps = hoeffding_bound(n_classes.log2(), p.split_confidence, leaf.weight());
        if best_gain <= 0.0 || !(best_gain - second_gain > eps || eps < p.tie_threshold) {
            return;
        }
        let (_, feature, threshold, left_dist, right_dist) = candidates.swap_remove(0);
        let dim = leaf.observers.len();
        let left = self.nodes.len();
        self.nodes.push(Node::Leaf(Leaf::new(dim, left_dist)));
        self.nodes.push(Node::Leaf(Leaf::new(dim, right_dist)));
        self.nodes[index] = Node::Split {
            feature,
            threshold,
            left,
            right: left + 1,
        };
    }
}

impl OnlineLearner for HoeffdingTree {
    fn predict_one(&self, x: &[f64]) -> Result<ClassId> {
        let dim = self.dim.ok_or(Error::Untrained)?;
        check_dim(dim, x)?;
        let Node::Leaf(leaf) = &self.nodes[self.leaf_index(x)] else {
            unreachable!("routing ends at a leaf");
        };
        // A fresh leaf with no estimated weight falls back to class 0.
        Ok(argmax(leaf.class_counts.iter().copied()).unwrap_or(0))
    }

    fn train_one(&mut self, x: &[f64], label: ClassId) -> Result<()> {
        let dim = self.dim.unwrap_or(x.len());
        check_dim(dim, x)?;
        if self.nodes.is_empty() {
            self.nodes.push(Node::Leaf(Leaf::new(dim, Vec::new())));
        }
        self.dim = Some(dim);
        let index = self.leaf_index(x);
        let Node::Leaf(leaf) = &mut self.nodes[index] else {
            unreachable!("routing ends at a leaf");
        };
        if leaf.class_counts.len() <= label {
            leaf.class_counts.resize(label + 1, 0.0);
        }
        leaf.class_counts[label] += 1.0;
        for (obs, &v) in leaf.observers.iter_mut().zip(x) {
            obs.push(v, label);
        }
        let weight = leaf.weight();
        if weight - leaf.weight_at_last_attempt >= self.params.grace_period as f64 {
            leaf.weight_at_last_attempt = weight;
            self.attempt_split(index);
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
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn entropy_and_gain_by_hand() {
        assert_eq!(entropy(&[5.0, 5.0]), 1.0);
        assert_eq!(entropy(&[4.0, 0.0]), 0.0);
        let parent = [5.0, 5.0];
        let perfect = [vec![5.0, 0.0], vec![0.0, 5.0]];
        assert_eq!(info_gain(&parent, &perfect, 0.01), Some(1.0));
        let useless = [vec![2.5, 2.5], vec![2.5, 2.5]];
        assert_eq!(info_gain(&parent, &useless, 0.01), Some(0.0));
        let lopsided = [vec![5.0, 5.0], vec![0.0, 0.0]];
        assert_eq!(info_gain(&parent, &lopsided, 0.01), None);
    }

    #[test]
    fn bound_matches_formula() {
        let eps = hoeffding_bound(1.0, 1e-7, 200.0);
        assert!((eps - (16.118095650958319 / 400.0f64).sqrt()).abs() < 1e-12);
    }

    fn majority_prefix(labels: &[usize]) -> usize {
        let ones = labels.iter().filter(|&&y| y == 1).count();
        usize::from(ones > labels.len() - ones)
    }

    #[test]
    fn infinite_grace_period_is_majority_baseline() {
        let mut tree = HoeffdingTree::new(HoeffdingTreeParams {
            grace_period: usize::MAX,
            ..Default::default()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut labels = Vec::new();
        for _ in 0..2000 {
            let x: f64 = rng.gen();
            let y = usize::from(x > 0.4);
            tree.train_one(&[x], y).unwrap();
            labels.push(y);
            assert_eq!(
                tree.predict_one(&[rng.gen()]).unwrap(),
                majority_prefix(&labels)
            );
        }
        assert_eq!(tree.n_leaves(), 1);
    }

    #[test]
    fn splits_on_the_deciding_binary_attribute() {
        let params = HoeffdingTreeParams::default();
        let mut tree = HoeffdingTree::new(params.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=400 {
            let bit = f64::from(rng.gen_bool(0.5) as u8);
            let x = [rng.gen::<f64>(), bit, rng.gen::<f64>()];
            tree.train_one(&x, bit as usize).unwrap();
            if n < params.grace_period {
                assert!(tree.root_split().is_none());
            }
        }
        let (feature, threshold) = tree.root_split().expect("split by 400 samples");
        assert_eq!(feature, 1);
        assert!(threshold > 0.0 && threshold < 1.0);
        assert_eq!(tree.predict_one(&[0.3, 0.0, 0.9]).unwrap(), 0);
        assert_eq!(tree.predict_one(&[0.3, 1.0, 0.9]).unwrap(), 1);
    }

    #[test]
    fn learns_an_axis_threshold() {
        let mut tree = HoeffdingTree::new(HoeffdingTreeParams::default());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5000 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            tree.train_one(&x, usize::from(x[0] > 0.62)).unwrap();
        }
        let mut errors = 0;
        for _ in 0..1000 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            errors += usize::from(tree.predict_one(&x).unwrap() != usize::from(x[0] > 0.62));
        }
        assert!(errors < 60, "{errors} errors");
    }

    #[test]
    fn single_class_never_splits() {
        let mut tree = HoeffdingTree::new(HoeffdingTreeParams {
            grace_period: 10,
            ..Default::default()
        });
        for i in 0..500 {
            tree.train_one(&[i as f64], 2).unwrap();
        }
        assert_eq!(tree.n_leaves(), 1);
        assert_eq!(tree.predict_one(&[3.0]).unwrap(), 2);
    }
}
