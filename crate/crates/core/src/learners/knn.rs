use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{argmax, check_dim, OnlineLearner};
use crate::error::{Error, Result};
use crate::sample::ClassId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub n_neighbors: usize,
    pub max_window_size: usize,
    /// Accepted for configuration compatibility; the search is exhaustive
    /// over the window, so there is no tree to size.
    pub leaf_size: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        Self {
            n_neighbors: 3,
            max_window_size: 10,
            leaf_size: 2,
        }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_neighbors == 0 || self.max_window_size == 0 || self.leaf_size == 0 {
            return Err(Error::Config("KNN parameters must be positive".into()));
        }
        if self.n_neighbors > self.max_window_size {
            return Err(Error::Config(format!(
                "n_neighbors ({}) exceeds max_window_size ({})",
                self.n_neighbors, self.max_window_size
            )));
        }
        Ok(())
    }
}

/// k-nearest neighbours over a FIFO window of the most recent samples.
#[derive(Clone, Debug)]
pub struct Knn {
    params: KnnParams,
    window: VecDeque<(Vec<f64>, ClassId)>,
}

impl Knn {
    pub fn new(params: KnnParams) -> Self {
        let window = VecDeque::with_capacity(params.max_window_size);
        Self { params, window }
    }

    pub fn window(&self) -> impl Iterator<Item = (&[f64], ClassId)> {
        self.window.iter().map(|(x, y)| (x.as_slice(), *y))
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

impl OnlineLearner for Knn {
    fn predict_one(&self, x: &[f64]) -> Result<ClassId> {
        let (first, _) = self.window.front().ok_or(Error::Untrained)?;
        check_dim(first.len(), x)?;

        // Stable sort keeps older samples first among equal distances.
        let mut dists: Vec<(f64, ClassId)> = self
            .window
            .iter()
            .map(|(w, y)| (squared_distance(w, x), *y))
            .collect();
        dists.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut votes: Vec<usize> = Vec::new();
        for &(_, y) in dists.iter().take(self.params.n_neighbors) {
            if votes.len() <= y {
                votes.resize(y + 1, 0);
            }
            votes[y] += 1;
        }
        Ok(argmax(votes.iter().map(|&v| v as f64)).expect("window is non-empty"))
    }

    fn train_one(&mut self, x: &[f64], label: ClassId) -> Result<()> {
        if let Some((first, _)) = self.window.front() {
            check_dim(first.len(), x)?;
        }
        if self.window.len() == self.params.max_window_size {
            self.window.pop_front();
        }
        self.window.push_back((x.to_vec(), label));
        Ok(())
    }

    fn reset(&mut self) {
        self.window.clear();
    }
}
