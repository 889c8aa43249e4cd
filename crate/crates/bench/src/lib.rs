//! Shared fixtures for the benches in `benches/`.

use grf_stream::data::{gen_sea, SeaSpec};
use grf_stream::{FeatureLimits, GrfConfig, GrfEncoder, Sample};

/// SEA function 1 samples; three features on `[0, 10]`.
pub fn sea_samples(n: usize, seed: u64) -> Vec<Sample> {
    gen_sea(&SeaSpec::new(1, n), seed)
        .and_then(|s| s.materialize())
        .expect("SEA generator")
}

/// Encoder with limits fixed from the first `warm` samples.
pub fn warm_encoder(samples: &[Sample], warm: usize, n_grfs: usize, gamma: f64) -> GrfEncoder {
    let limits = FeatureLimits::from_rows(samples[..warm].iter().map(|s| s.features.as_slice()))
        .expect("non-empty warm start");
    GrfEncoder::new(GrfConfig::new(n_grfs, gamma).expect("valid config"), limits)
}

/// Encodes every sample.
pub fn encode_all(encoder: &GrfEncoder, samples: &[Sample]) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| Sample::new(encoder.encode(&s.features).expect("matching dim"), s.label))
        .collect()
}
