use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StreamSource;
use crate::error::{Error, Result};
use crate::sample::Sample;

/// Classic thresholds of the four SEA classification functions.
pub const SEA_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

fn default_n_samples() -> usize {
    50_000
}

/// SEA stream: three attributes uniform on `[0, 10]`; class 1 when the first
/// two sum to at most the function's threshold. The third is noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeaSpec {
    /// Classification function, 1 to 4.
    pub function: u8,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    /// Overrides the function's default threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Probability of flipping each label.
    #[serde(default)]
    pub noise: f64,
}

impl SeaSpec {
    pub fn new(function: u8, n_samples: usize) -> Self {
        Self {
            function,
            n_samples,
            threshold: None,
            noise: 0.0,
        }
    }

    pub fn threshold(&self) -> Result<f64> {
        if !(1..=4).contains(&self.function) {
            return Err(Error::Config(format!(
                "SEA function must be 1..=4, got {}",
                self.function
            )));
        }
        Ok(self
            .threshold
            .unwrap_or(SEA_THRESHOLDS[usize::from(self.function) - 1]))
    }

    pub fn label(threshold: f64, features: &[f64]) -> usize {
        usize::from(features[0] + features[1] <= threshold)
    }
}

pub fn gen_sea(spec: &SeaSpec, seed: u64) -> Result<StreamSource> {
    let threshold = spec.threshold()?;
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(Error::Config("SEA noise must lie in [0, 1]".into()));
    }
    let noise = spec.noise;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..spec.n_samples).map(move |_| {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..=10.0)).collect();
        let mut label = SeaSpec::label(threshold, &x);
        if noise > 0.0 && rng.gen_bool(noise) {
            label = 1 - label;
        }
        Ok(Sample::new(x, label))
    });
    Ok(StreamSource::new(
        Box::new(samples),
        Some(spec.n_samples),
        3,
        Some(2),
    ))
}
