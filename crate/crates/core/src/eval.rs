//! Prequential bookkeeping: cumulative Kappa, sliding-window McNemar and
//! processing time.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::ClassId;

/// Chi-square critical value, one degree of freedom, 0.95 confidence.
pub const MCNEMAR_CRITICAL: f64 = 3.841459;

/// Confusion-matrix marginals accumulated one prediction at a time.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalLedger {
    true_counts: Vec<u64>,
    predicted_counts: Vec<u64>,
    correct: u64,
    total: u64,
}

impl EvalLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, predicted: ClassId, actual: ClassId) {
        let needed = predicted.max(actual) + 1;
        if self.true_counts.len() < needed {
            self.true_counts.resize(needed, 0);
            self.predicted_counts.resize(needed, 0);
        }
        self.true_counts[actual] += 1;
        self.predicted_counts[predicted] += 1;
        self.correct += u64::from(predicted == actual);
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn correct(&self) -> u64 {
        self.correct
    }

    pub fn true_counts(&self) -> &[u64] {
        &self.true_counts
    }

    pub fn predicted_counts(&self) -> &[u64] {
        &self.predicted_counts
    }

    /// Prequential accuracy `p_o`.
    pub fn accuracy(&self) -> Result<f64> {
        if self.total == 0 {
            return Err(Error::Empty);
        }
        Ok(self.correct as f64 / self.total as f64)
    }

    /// Agreement expected from a chance classifier with the same marginals.
    pub fn chance_agreement(&self) -> Result<f64> {
        if self.total == 0 {
            return Err(Error::Empty);
        }
        let n = self.total as f64;
        Ok(self
            .true_counts
            .iter()
            .zip(&self.predicted_counts)
            .map(|(&t, &p)| (t as f64 / n) * (p as f64 / n))
            .sum())
    }

    /// Cohen's Kappa `(p_o - p_c) / (1 - p_c)`; 0 when `p_c = 1`.
    pub fn kappa(&self) -> Result<f64> {
        let po = self.accuracy()?;
        let pc = self.chance_agreement()?;
        if pc >= 1.0 {
            return Ok(0.0);
        }
        Ok((po - pc) / (1.0 - pc))
    }
}

/// Joint outcome of two classifiers on one sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairedOutcome {
    BothCorrect,
    OnlyAWrong,
    OnlyBWrong,
    BothWrong,
}

impl PairedOutcome {
    pub fn from_errors(a_wrong: bool, b_wrong: bool) -> Self {
        match (a_wrong, b_wrong) {
            (false, false) => PairedOutcome::BothCorrect,
            (true, false) => PairedOutcome::OnlyAWrong,
            (false, true) => PairedOutcome::OnlyBWrong,
            (true, true) => PairedOutcome::BothWrong,
        }
    }
}

/// McNemar statistic `(a - b)^2 / (a + b)`, taken as 0 when `a + b = 0`.
pub fn mcnemar_statistic(a: u64, b: u64) -> f64 {
    if a + b == 0 {
        return 0.0;
    }
    let d = a as f64 - b as f64;
    d * d / (a + b) as f64
}

/// McNemar test over the last `window` paired outcomes, evaluated after
/// every push (including while the window is still filling).
#[derive(Clone, Debug)]
pub struct McNemarWindow {
    window: usize,
    buffer: VecDeque<PairedOutcome>,
    only_a_wrong: u64,
    only_b_wrong: u64,
    rejections: u64,
    steps: u64,
}

impl McNemarWindow {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::Config("McNemar window must be positive".into()));
        }
        Ok(Self {
            window,
            buffer: VecDeque::with_capacity(window),
            only_a_wrong: 0,
            only_b_wrong: 0,
            rejections: 0,
            steps: 0,
        })
    }

    fn adjust(&mut self, outcome: PairedOutcome, up: bool) {
        let counter = match outcome {
            PairedOutcome::OnlyAWrong => &mut self.only_a_wrong,
            PairedOutcome::OnlyBWrong => &mut self.only_b_wrong,
            _ => return,
        };
        if up {
            *counter += 1;
        } else {
            *counter -= 1;
        }
    }

    /// Pushes one paired outcome and returns whether the null hypothesis is
    /// rejected over the current window.
    pub fn step(&mut self, a_wrong: bool, b_wrong: bool) -> bool {
        if self.buffer.len() == self.window {
            let old = self.buffer.pop_front().expect("full window");
            self.adjust(old, false);
        }
        let outcome = PairedOutcome::from_errors(a_wrong, b_wrong);
        self.buffer.push_back(outcome);
        self.adjust(outcome, true);
        self.steps += 1;
        let reject = self.statistic() > MCNEMAR_CRITICAL;
        self.rejections += u64::from(reject);
        reject
    }

    pub fn statistic(&self) -> f64 {
        mcnemar_statistic(self.only_a_wrong, self.only_b_wrong)
    }

    /// `(a, b)`: samples only A got wrong, samples only B got wrong.
    pub fn discordant(&self) -> (u64, u64) {
        (self.only_a_wrong, self.only_b_wrong)
    }

    pub fn outcomes(&self) -> impl Iterator<Item = PairedOutcome> + '_ {
        self.buffer.iter().copied()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn rejections(&self) -> u64 {
        self.rejections
    }

    /// Percentage of steps at which the null hypothesis was rejected.
    pub fn rejection_percentage(&self) -> Result<f64> {
        if self.steps == 0 {
            return Err(Error::Empty);
        }
        Ok(100.0 * self.rejections as f64 / self.steps as f64)
    }
}

/// Outcome of one prequential run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kappa: f64,
    pub accuracy: f64,
    /// Samples evaluated after the warm start.
    pub evaluated: u64,
    pub drifts: u64,
    pub learner_resets: u64,
    pub detector_resets: u64,
    /// Seconds spent in the transform and the learner over the evaluated
    /// portion; detector updates and scoring are not included.
    pub processing_time_s: f64,
    /// `(samples evaluated, kappa so far)` checkpoints.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappa_trajectory: Vec<(u64, f64)>,
}

impl RunReport {
    /// Same report with timing zeroed, for comparisons that must ignore
    /// wall-clock noise.
    pub fn without_timing(&self) -> RunReport {
        RunReport {
            processing_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// Runs `f` and returns its output with the elapsed monotonic time.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}
