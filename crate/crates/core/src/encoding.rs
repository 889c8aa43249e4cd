//! Gaussian receptive field (GRF) population encoding.
//!
//! Each real-valued feature is represented by its response under `n_grfs`
//! equally spaced Gaussian curves spanning the feature's observed range. The
//! centers straddle the range: with step `s = (max - min) / (n_grfs - 2)` the
//! `i`-th field (1-based) sits at `min + (2i - 3) / 2 * s`, so the first and
//! last centers lie half a step outside `[min, max]`. Every field of a feature
//! shares the width `s / gamma`.
//!
//! A sample with `d` features becomes a vector of `d * n_grfs` values in
//! `(0, 1]`, feature blocks concatenated in input order.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width used when a feature's range collapses to a single value.
pub const MIN_WIDTH: f64 = 1e-9;

/// Smallest value an encoded entry can take. `exp` underflows to zero a few
/// hundred widths away from a center; entries are clamped here so the output
/// stays strictly positive.
pub const MIN_RESPONSE: f64 = f64::MIN_POSITIVE;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrfConfig")]
pub struct GrfConfig {
    n_grfs: usize,
    gamma: f64,
}

#[derive(Deserialize)]
struct RawGrfConfig {
    n_grfs: usize,
    gamma: f64,
}

impl TryFrom<RawGrfConfig> for GrfConfig {
    type Error = Error;

    fn try_from(raw: RawGrfConfig) -> Result<Self> {
        GrfConfig::new(raw.n_grfs, raw.gamma)
    }
}

impl GrfConfig {
    /// `n_grfs` must be at least 3 (the center spacing divides by
    /// `n_grfs - 2`) and `gamma` must be positive and finite.
    pub fn new(n_grfs: usize, gamma: f64) -> Result<Self> {
        if n_grfs < 3 {
            return Err(Error::Config(format!(
                "n_grfs must be at least 3, got {n_grfs}"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        Ok(Self { n_grfs, gamma })
    }

    pub fn n_grfs(&self) -> usize {
        self.n_grfs
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Observed `[min, max]` of one feature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min <= max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Config(format!(
                "invalid feature range [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    fn point(x: f64) -> Self {
        Self { min: x, max: x }
    }

    /// Widens the range to include `x`; returns whether it changed.
    pub fn include(&mut self, x: f64) -> bool {
        let mut changed = false;
        if x < self.min {
            self.min = x;
            changed = true;
        }
        if x > self.max {
            self.max = x;
            changed = true;
        }
        changed
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }
}

/// Per-feature limits used to lay out the receptive fields.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureLimits {
    ranges: Vec<FeatureRange>,
}

impl FeatureLimits {
    pub fn new(ranges: Vec<FeatureRange>) -> Self {
        Self { ranges }
    }

    /// Running min/max over a non-empty batch of feature vectors.
    pub fn from_rows<'a, I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut rows = rows.into_iter();
        let first = rows.next().ok_or(Error::Empty)?;
        let mut limits = Self {
            ranges: first.iter().map(|&x| FeatureRange::point(x)).collect(),
        };
        for row in rows {
            limits.update(row)?;
        }
        Ok(limits)
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[FeatureRange] {
        &self.ranges
    }

    /// Expands each feature's range to include `features`. Returns the
    /// indices of features whose range changed.
    pub fn update(&mut self, features: &[f64]) -> Result<Vec<usize>> {
        check_dim(self.ranges.len(), features.len())?;
        Ok(self
            .ranges
            .iter_mut()
            .zip(features)
            .enumerate()
            .filter_map(|(i, (range, &x))| range.include(x).then_some(i))
            .collect())
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension {
            feature: expected.min(actual),
            expected,
            actual,
        });
    }
    Ok(())
}

/// One Gaussian curve of a population.
///
/// The center is also kept as an offset from the range minimum; measuring
/// `x` from the minimum first keeps responses affine-equivariant in floating
/// point, not just algebraically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrfField {
    pub center: f64,
    pub width: f64,
    anchor: f64,
    offset: f64,
}

impl GrfField {
    pub fn new(anchor: f64, offset: f64, width: f64) -> Self {
        Self {
            center: anchor + offset,
            width,
            anchor,
            offset,
        }
    }

    #[inline]
    pub fn response(&self, x: f64) -> f64 {
        let d = ((x - self.anchor) - self.offset) / self.width;
        (-0.5 * d * d).exp().max(MIN_RESPONSE)
    }
}

/// Lays out `config.n_grfs()` fields over `range`.
pub fn build_fields(range: FeatureRange, config: &GrfConfig) -> Vec<GrfField> {
    let n = config.n_grfs;
    let step = range.span() / (n - 2) as f64;
    let width = (step / config.gamma).max(MIN_WIDTH);
    (1..=n)
        .map(|i| GrfField::new(range.min, (2.0 * i as f64 - 3.0) / 2.0 * step, width))
        .collect()
}

/// Response of every field to `x`, in field order.
pub fn encode_feature(x: f64, fields: &[GrfField]) -> Vec<f64> {
    let mut out = Vec::with_capacity(fields.len());
    encode_feature_into(x, fields, &mut out);
    out
}

/// Appends the field responses for `x` to `out`.
#[inline]
pub fn encode_feature_into(x: f64, fields: &[GrfField], out: &mut Vec<f64>) {
    out.extend(fields.iter().map(|f| f.response(x)));
}

/// How limits evolve after the warm start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitStrategy {
    /// Limits are fixed from the warm-start portion.
    #[default]
    WarmStartFixed,
    /// Limits widen with every incoming sample.
    OnlineUpdate,
}

/// Stateful encoder: configuration, current limits and the cached fields
/// derived from them.
#[derive(Clone, Debug)]
pub struct GrfEncoder {
    config: GrfConfig,
    limits: FeatureLimits,
    fields: Vec<Vec<GrfField>>,
}

impl GrfEncoder {
    pub fn new(config: GrfConfig, limits: FeatureLimits) -> Self {
        let fields = limits
            .ranges()
            .iter()
            .map(|&r| build_fields(r, &config))
            .collect();
        Self {
            config,
            limits,
            fields,
        }
    }

    pub fn config(&self) -> &GrfConfig {
        &self.config
    }

    pub fn limits(&self) -> &FeatureLimits {
        &self.limits
    }

    /// Fields of feature `feature`, in order.
    pub fn fields(&self, feature: usize) -> &[GrfField] {
        &self.fields[feature]
    }

    pub fn input_dim(&self) -> usize {
        self.limits.dim()
    }

    pub fn output_dim(&self) -> usize {
        self.limits.dim() * self.config.n_grfs
    }

    /// Widens the limits to include `features`, rebuilding the fields of any
    /// feature whose range moved.
    pub fn update_limits(&mut self, features: &[f64]) -> Result<()> {
        for i in self.limits.update(features)? {
            self.fields[i] = build_fields(self.limits.ranges[i], &self.config);
        }
        Ok(())
    }

    pub fn encode(&self, features: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.output_dim());
        self.encode_into(features, &mut out)?;
        Ok(out)
    }

    /// Clears `out` and writes the population code of `features` into it.
    pub fn encode_into(&self, features: &[f64], out: &mut Vec<f64>) -> Result<()> {
        check_dim(self.limits.dim(), features.len())?;
        out.clear();
        out.reserve(self.output_dim());
        for (&x, fields) in features.iter().zip(&self.fields) {
            encode_feature_into(x, fields, out);
        }
        Ok(())
    }
}

/// One row of an encoding grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub x: f64,
    pub field_index: usize,
    pub value: f64,
}

/// Evaluates every field on `resolution` equally spaced inputs across the
/// range (endpoints included). Field indices are 0-based.
pub fn dump_encoding_grid(
    range: FeatureRange,
    config: &GrfConfig,
    resolution: usize,
) -> Result<Vec<GridRow>> {
    if resolution < 2 {
        return Err(Error::Config(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    let fields = build_fields(range, config);
    let last = (resolution - 1) as f64;
    let mut rows = Vec::with_capacity(resolution * fields.len());
    for k in 0..resolution {
        let x = if k == resolution - 1 {
            range.max
        } else {
            range.min + range.span() * k as f64 / last
        };
        rows.extend(fields.iter().enumerate().map(|(field_index, f)| GridRow {
            x,
            field_index,
            value: f.response(x),
        }));
    }
    Ok(rows)
}

/// Writes grid rows as a delimiter-separated table with a header line.
pub fn write_grid<W: Write>(rows: &[GridRow], delimiter: u8, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(out);
    w.write_record(["x", "field_index", "value"])?;
    for row in rows {
        w.write_record([
            row.x.to_string(),
            row.field_index.to_string(),
            row.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
