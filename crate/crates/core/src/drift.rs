//! ADWIN change detector over a bounded `[0, 1]` stream.
//!
//! The window is kept as an exponential histogram: row `r` holds up to
//! `buckets_per_row` buckets, each summarising `2^r` consecutive values. When a
//! row overflows its two oldest buckets merge into one bucket of the next row,
//! so memory grows with `log(W)`.
//!
//! After every insertion each bucket boundary splits the window into an older
//! part `W0` and a newer part `W1`. With `m = 1 / (1/|W0| + 1/|W1|)` the window
//! is cut when
//!
//! ```text
//! |mean(W0) - mean(W1)| >= sqrt(ln(4 |W| / delta) / (2 m))
//! ```
//!
//! and the older part is dropped; checking repeats until no boundary cuts.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdwinParams {
    pub delta: f64,
    /// Maximum buckets per histogram row.
    pub buckets_per_row: usize,
}

impl Default for AdwinParams {
    fn default() -> Self {
        Self {
            delta: 0.002,
            buckets_per_row: 32,
        }
    }
}

impl AdwinParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "ADWIN delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.buckets_per_row < 2 {
            return Err(Error::Config(
                "ADWIN needs at least 2 buckets per row".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Adwin {
    params: AdwinParams,
    // rows[r] holds the sums of buckets of exactly 2^r values, oldest first.
    rows: Vec<VecDeque<f64>>,
    width: u64,
    total: f64,
    last_shift: Option<f64>,
}

impl Adwin {
    pub fn new(params: AdwinParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            rows: Vec::new(),
            width: 0,
            total: 0.0,
            last_shift: None,
        })
    }

    pub fn params(&self) -> &AdwinParams {
        &self.params
    }

    /// Number of values in the current window.
    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn mean(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            self.total / self.width as f64
        }
    }

    pub fn bucket_count(&self) -> usize {
        self.rows.iter().map(VecDeque::len).sum()
    }

    /// Empties the window, keeping the parameters.
    pub fn reset(&mut self) {
        self.rows.clear();
        self.width = 0;
        self.total = 0.0;
        self.last_shift = None;
    }

    /// Signed change behind the most recent cut: mean of the retained window
    /// minus mean of everything dropped by that insertion. Positive means the
    /// monitored value went up.
    pub fn last_shift(&self) -> Option<f64> {
        self.last_shift
    }

    /// Appends `value` and reports whether the window was cut.
    pub fn add_element(&mut self, value: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::DetectorInput(value));
        }
        self.insert(value);
        let (width, total) = (self.width, self.total);
        let mut drift = false;
        while self.cut_once() {
            drift = true;
        }
        if drift {
            let dropped = (total - self.total) / (width - self.width) as f64;
            self.last_shift = Some(self.mean() - dropped);
        }
        Ok(drift)
    }

    fn insert(&mut self, value: f64) {
        self.width += 1;
        self.total += value;
        if self.rows.is_empty() {
            self.rows
                .push(VecDeque::with_capacity(self.params.buckets_per_row + 1));
        }
        self.rows[0].push_back(value);
        let mut r = 0;
        while self.rows[r].len() > self.params.buckets_per_row {
            let a = self.rows[r].pop_front().expect("row overflow");
            let b = self.rows[r].pop_front().expect("row overflow");
            if self.rows.len() == r + 1 {
                self.rows
                    .push(VecDeque::with_capacity(self.params.buckets_per_row + 1));
            }
            self.rows[r + 1].push_back(a + b);
            r += 1;
        }
    }

    /// Looks for the oldest cutting boundary and drops everything before it.
    fn cut_once(&mut self) -> bool {
        if self.width < 2 {
            return false;
        }
        let w = self.width as f64;
        // With diff = (s0 n1 - s1 n0) / (n0 n1) and m = n0 n1 / W the cut
        // condition 2 m diff^2 >= ln(4W/delta) needs no division; this scan
        // runs on every insertion and dominates the detector's cost.
        let threshold = (4.0 * w / self.params.delta).ln() * w;
        let total = self.total;
        let mut n0 = 0.0;
        let mut s0 = 0.0;
        let mut cut: Option<(usize, usize)> = None;
        'scan: for r in (0..self.rows.len()).rev() {
            let size = (1u64 << r) as f64;
            let (front, back) = self.rows[r].as_slices();
            for (i, &sum) in front.iter().chain(back).enumerate() {
                n0 += size;
                s0 += sum;
                let n1 = w - n0;
                if n1 <= 0.0 {
                    break 'scan;
                }
                let num = s0 * n1 - (total - s0) * n0;
                if 2.0 * num * num >= threshold * n0 * n1 {
                    cut = Some((r, i));
                    break 'scan;
                }
            }
        }
        let Some((row, idx)) = cut else {
            return false;
        };
        for r in (row + 1..self.rows.len()).rev() {
            self.width -= (self.rows[r].len() as u64) << r;
            self.total -= self.rows[r].drain(..).sum::<f64>();
        }
        self.width -= ((idx + 1) as u64) << row;
        self.total -= self.rows[row].drain(..=idx).sum::<f64>();
        while self.rows.last().is_some_and(VecDeque::is_empty) {
            self.rows.pop();
        }
        true
    }
}
