//! Sample sources: synthetic concept streams, the SEA generator, and
//! delimiter-separated files.

mod file;
mod sea;
mod synthetic;

pub use file::{load_stream, ColumnRef, FileSchema};
pub use sea::{gen_sea, SeaSpec, SEA_THRESHOLDS};
pub use synthetic::{gen_concept, Boundary, Family, SyntheticSpec};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sample::Sample;

/// A single-consumer stream of samples.
pub struct StreamSource {
    samples: Box<dyn Iterator<Item = Result<Sample>> + Send>,
    len: Option<usize>,
    n_features: usize,
    n_classes: Option<usize>,
}

impl StreamSource {
    pub fn new(
        samples: Box<dyn Iterator<Item = Result<Sample>> + Send>,
        len: Option<usize>,
        n_features: usize,
        n_classes: Option<usize>,
    ) -> Self {
        Self {
            samples,
            len,
            n_features,
            n_classes,
        }
    }

    pub fn from_samples(samples: Vec<Sample>, n_classes: Option<usize>) -> Self {
        let n_features = samples.first().map_or(0, Sample::dim);
        let len = Some(samples.len());
        Self::new(
            Box::new(samples.into_iter().map(Ok)),
            len,
            n_features,
            n_classes,
        )
    }

    /// Total length, when known up front.
    pub fn len(&self) -> Option<usize> {
        self.len
    }

    pub fn is_empty(&self) -> Option<bool> {
        self.len.map(|n| n == 0)
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Number of classes, when known up front.
    pub fn n_classes(&self) -> Option<usize> {
        self.n_classes
    }

    /// Reads the whole stream into memory.
    pub fn materialize(self) -> Result<Vec<Sample>> {
        self.samples.collect()
    }
}

impl Iterator for StreamSource {
    type Item = Result<Sample>;

    fn next(&mut self) -> Option<Self::Item> {
        self.samples.next()
    }
}

/// Where an experiment's samples come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DatasetSpec {
    Synthetic(SyntheticSpec),
    Sea(SeaSpec),
    File(FileSchema),
}

impl DatasetSpec {
    /// Opens the stream. `seed` drives the synthetic generators and is
    /// ignored for files.
    pub fn open(&self, seed: u64) -> Result<StreamSource> {
        match self {
            DatasetSpec::Synthetic(spec) => gen_concept(spec, seed),
            DatasetSpec::Sea(spec) => gen_sea(spec, seed),
            DatasetSpec::File(schema) => load_stream(schema),
        }
    }

    pub fn is_synthetic(&self) -> bool {
        !matches!(self, DatasetSpec::File(_))
    }

    /// Short label for reports, e.g. `circle_concept1` or `sea_f1`.
    pub fn name(&self) -> String {
        match self {
            DatasetSpec::Synthetic(s) => format!("{}_concept{}", s.family.name(), s.concept),
            DatasetSpec::Sea(s) => format!("sea_f{}", s.function),
            DatasetSpec::File(f) => f.path.file_stem().map_or_else(
                || f.path.display().to_string(),
                |s| s.to_string_lossy().into_owned(),
            ),
        }
    }
}
