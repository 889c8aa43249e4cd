use serde::{Deserialize, Serialize};

/// Dense class identifier. Labels are mapped to `0..n_classes` in first-seen
/// order by the data sources.
pub type ClassId = usize;

/// One labelled observation flowing through the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: ClassId,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: ClassId) -> Self {
        Self { features, label }
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}
