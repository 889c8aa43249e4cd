use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{ExperimentConfig, ResetPolicy, RunSettings};
use super::report::{PairedResult, RunRecord};
use crate::drift::Adwin;
use crate::encoding::{FeatureLimits, GrfEncoder, LimitStrategy};
use crate::error::{Error, Result};
use crate::eval::{EvalLedger, McNemarWindow, RunReport};
use crate::learners::LearnerKind;
use crate::sample::Sample;

/// Which side of a paired comparison a run belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Baseline,
    Grf,
}

impl Arm {
    pub fn name(&self) -> &'static str {
        match self {
            Arm::Baseline => "baseline",
            Arm::Grf => "grf",
        }
    }
}

/// Per-sample transform applied in front of the learner.
enum Transform {
    Identity,
    Grf {
        encoder: GrfEncoder,
        online: bool,
    },
    /// Min-max scaling into `[0, 1]` from the warm-start limits, clamped;
    /// keeps raw streams usable by learners that need non-negative input.
    UnitScale(FeatureLimits),
}

impl Transform {
    fn new(
        warm: &[Sample],
        arm: Arm,
        learner: &LearnerKind,
        settings: &RunSettings,
    ) -> Result<Self> {
        let limits = || FeatureLimits::from_rows(warm.iter().map(|s| s.features.as_slice()));
        Ok(match arm {
            Arm::Grf => Transform::Grf {
                encoder: GrfEncoder::new(settings.grf.config()?, limits()?),
                online: settings.grf.limits == LimitStrategy::OnlineUpdate,
            },
            Arm::Baseline if learner.requires_non_negative() => Transform::UnitScale(limits()?),
            Arm::Baseline => Transform::Identity,
        })
    }

    /// Writes the learner input for `x` into `out`.
    fn apply(&mut self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        match self {
            Transform::Identity => {
                out.clear();
                out.extend_from_slice(x);
            }
            Transform::Grf { encoder, online } => {
                if *online {
                    encoder.update_limits(x)?;
                }
                encoder.encode_into(x, out)?;
            }
            Transform::UnitScale(limits) => {
                if limits.dim() != x.len() {
                    return Err(Error::Dimension {
                        feature: limits.dim().min(x.len()),
                        expected: limits.dim(),
                        actual: x.len(),
                    });
                }
                out.clear();
                out.extend(x.iter().zip(limits.ranges()).map(|(&v, r)| {
                    let span = r.span();
                    if span > 0.0 {
                        ((v - r.min) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                }));
            }
        }
        Ok(())
    }
}

/// Result of one arm over one sample sequence.
#[derive(Clone, Debug)]
pub struct ArmOutcome {
    pub report: RunReport,
    /// Per evaluated sample: whether the prediction was wrong.
    pub errors: Vec<bool>,
}

/// Runs the warm-start then test-then-train loop over `samples`.
///
/// The first `pretrain_size` samples fix the encoder limits and train the
/// learner; every later sample is transformed, predicted, scored, fed to the
/// drift detector as a 0/1 error and then trained on. A detected drift (as
/// filtered by `settings.reset_on`) resets both learner and detector.
///
/// The reported processing time covers the learner's share of the evaluation
/// loop only: transform, prediction, resets and training.
pub fn run_arm(
    samples: &[Sample],
    learner_kind: &LearnerKind,
    settings: &RunSettings,
    arm: Arm,
) -> Result<ArmOutcome> {
    settings.validate()?;
    let pretrain = settings.pretrain_size;
    if samples.len() <= pretrain {
        return Err(Error::StreamTooShort {
            available: samples.len(),
            required: pretrain + 1,
        });
    }
    let (warm, rest) = samples.split_at(pretrain);

    let mut transform = Transform::new(warm, arm, learner_kind, settings)?;
    let mut learner = learner_kind.build()?;
    let mut detector = Adwin::new(settings.drift.clone())?;
    let mut input = Vec::new();

    for (i, s) in warm.iter().enumerate() {
        transform
            .apply(&s.features, &mut input)
            .and_then(|()| learner.train_one(&input, s.label))
            .map_err(|e| e.at_sample(i))?;
    }

    let mut ledger = EvalLedger::new();
    let mut errors = Vec::with_capacity(rest.len());
    let mut trajectory = Vec::new();
    let mut drifts = 0u64;

    // Only learner work is timed: the transform, prediction, resets and
    // training. Detector updates and scoring are harness overhead.
    let mut elapsed = Duration::ZERO;
    for (i, s) in rest.iter().enumerate() {
        let mut step = || -> Result<(bool, bool)> {
            let t0 = Instant::now();
            transform.apply(&s.features, &mut input)?;
            let predicted = learner.predict_one(&input)?;
            elapsed += t0.elapsed();
            ledger.record(predicted, s.label);
            let wrong = predicted != s.label;
            let drift = detector.add_element(if wrong { 1.0 } else { 0.0 })?
                && counts_as_drift(&detector, settings.reset_on);
            let t1 = Instant::now();
            if drift {
                learner.reset();
                detector.reset();
            }
            learner.train_one(&input, s.label)?;
            elapsed += t1.elapsed();
            Ok((wrong, drift))
        };
        let (wrong, drift) = step().map_err(|e| e.at_sample(pretrain + i))?;
        errors.push(wrong);
        drifts += u64::from(drift);
        if settings.trajectory_every > 0 && (i + 1) % settings.trajectory_every == 0 {
            trajectory.push((ledger.total(), ledger.kappa()?));
        }
    }

    Ok(ArmOutcome {
        report: RunReport {
            kappa: ledger.kappa()?,
            accuracy: ledger.accuracy()?,
            evaluated: ledger.total(),
            drifts,
            learner_resets: drifts,
            detector_resets: drifts,
            processing_time_s: elapsed.as_secs_f64(),
            kappa_trajectory: trajectory,
        },
        errors,
    })
}

fn counts_as_drift(detector: &Adwin, policy: ResetPolicy) -> bool {
    match policy {
        ResetPolicy::AnyChange => true,
        ResetPolicy::ErrorIncrease => detector.last_shift().is_some_and(|s| s > 0.0),
    }
}

/// Materializes the stream for repetition `rep`.
pub fn load_samples(config: &ExperimentConfig, rep: usize) -> Result<Vec<Sample>> {
    config
        .dataset
        .open(config.settings.seed.wrapping_add(rep as u64))?
        .materialize()
}

fn single_arm(config: &ExperimentConfig) -> Arm {
    if config.settings.grf.enabled {
        Arm::Grf
    } else {
        Arm::Baseline
    }
}

/// One run of the configured arm (encoded when `grf.enabled`) on the first
/// repetition's stream.
pub fn run_single(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let samples = load_samples(config, 0)?;
    Ok(run_arm(
        &samples,
        &config.learner,
        &config.settings,
        single_arm(config),
    )?
    .report)
}

/// Execution knobs that do not affect results.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    /// Worker threads for repetitions and suite entries; 1 runs inline.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { jobs: 1 }
    }
}

pub(crate) fn map_jobs<T, U, F>(items: Vec<T>, options: RunOptions, f: F) -> Result<Vec<U>>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Send + Sync,
{
    if options.jobs <= 1 {
        return Ok(items.into_iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.into_par_iter().map(f).collect()))
}

/// Every repetition of the configured single arm.
pub fn run_repeated(config: &ExperimentConfig, options: RunOptions) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let arm = single_arm(config);
    let reps: Vec<usize> = (0..config.settings.repetitions).collect();
    map_jobs(reps, options, |rep| {
        let samples = load_samples(config, rep)?;
        let report = run_arm(&samples, &config.learner, &config.settings, arm)?.report;
        Ok(RunRecord::new(config, rep, arm, report, None))
    })?
    .into_iter()
    .collect()
}

/// Baseline and encoded arms over one shared sample sequence, plus the
/// McNemar rejection percentage of the pair.
pub fn run_paired_once(
    samples: &[Sample],
    learner: &LearnerKind,
    settings: &RunSettings,
) -> Result<(RunReport, RunReport, f64)> {
    let base = run_arm(samples, learner, settings, Arm::Baseline)?;
    let grf = run_arm(samples, learner, settings, Arm::Grf)?;
    let mut window = McNemarWindow::new(settings.mcnemar_window)?;
    for (&a, &b) in base.errors.iter().zip(&grf.errors) {
        window.step(a, b);
    }
    Ok((base.report, grf.report, window.rejection_percentage()?))
}

/// Paired comparison over all repetitions.
pub fn run_paired(config: &ExperimentConfig, options: RunOptions) -> Result<PairedResult> {
    config.validate()?;
    let reps: Vec<usize> = (0..config.settings.repetitions).collect();
    let runs = map_jobs(reps, options, |rep| {
        let samples = load_samples(config, rep)?;
        run_paired_once(&samples, &config.learner, &config.settings)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(PairedResult::from_runs(config, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatasetSpec, Family, SyntheticSpec};
    use crate::learners::{KnnParams, MultinomialNbParams};

    fn small_config(learner: LearnerKind) -> ExperimentConfig {
        let mut spec = SyntheticSpec::new(Family::Circle, 1);
        spec.replications = 4;
        let mut c = ExperimentConfig::new(DatasetSpec::Synthetic(spec), learner);
        c.settings.pretrain_size = 1000;
        c.settings.repetitions = 2;
        c
    }

    #[test]
    fn stream_shorter_than_warm_start() {
        let samples = vec![Sample::new(vec![0.0], 0); 5];
        let mut settings = RunSettings::default();
        settings.pretrain_size = 5;
        let err =
            run_arm(&samples, &LearnerKind::Perceptron, &settings, Arm::Baseline).unwrap_err();
        assert!(matches!(err, Error::StreamTooShort { .. }));
    }

    #[test]
    fn one_evaluated_sample_at_the_boundary() {
        let c = small_config(LearnerKind::Perceptron);
        let samples = load_samples(&c, 0).unwrap();
        let mut settings = c.settings.clone();
        settings.pretrain_size = samples.len() - 1;
        let out = run_arm(&samples, &c.learner, &settings, Arm::Grf).unwrap();
        assert_eq!(out.report.evaluated, 1);
        assert_eq!(out.errors.len(), 1);
    }

    #[test]
    fn baseline_matches_direct_evaluation() {
        let c = small_config(LearnerKind::Knn(KnnParams::default()));
        let samples = load_samples(&c, 0).unwrap();
        let out = run_arm(&samples, &c.learner, &c.settings, Arm::Baseline).unwrap();

        let mut learner = c.learner.build().unwrap();
        let mut detector = Adwin::new(c.settings.drift.clone()).unwrap();
        let (warm, rest) = samples.split_at(c.settings.pretrain_size);
        for s in warm {
            learner.train_one(&s.features, s.label).unwrap();
        }
        let mut ledger = EvalLedger::new();
        for s in rest {
            let p = learner.predict_one(&s.features).unwrap();
            ledger.record(p, s.label);
            if detector
                .add_element(f64::from(u8::from(p != s.label)))
                .unwrap()
                && detector.last_shift().unwrap() > 0.0
            {
                learner.reset();
                detector.reset();
            }
            learner.train_one(&s.features, s.label).unwrap();
        }
        assert_eq!(out.report.kappa, ledger.kappa().unwrap());
    }

    #[test]
    fn deterministic_reports() {
        let c = small_config(LearnerKind::MultinomialNb(MultinomialNbParams::default()));
        let a = run_paired(&c, RunOptions::default()).unwrap();
        let b = run_paired(&c, RunOptions { jobs: 2 }).unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
    }

    #[test]
    fn baseline_arm_equals_single_run() {
        let mut c = small_config(LearnerKind::Perceptron);
        c.settings.repetitions = 1;
        let paired = run_paired(&c, RunOptions::default()).unwrap();
        c.settings.grf.enabled = false;
        let single = run_single(&c).unwrap();
        assert_eq!(paired.baseline[0].without_timing(), single.without_timing());
    }

    #[test]
    fn identical_arms_never_reject() {
        let c = small_config(LearnerKind::Perceptron);
        let samples = load_samples(&c, 0).unwrap();
        let a = run_arm(&samples, &c.learner, &c.settings, Arm::Baseline).unwrap();
        let b = run_arm(&samples, &c.learner, &c.settings, Arm::Baseline).unwrap();
        let mut w = McNemarWindow::new(500).unwrap();
        for (&x, &y) in a.errors.iter().zip(&b.errors) {
            w.step(x, y);
            assert_eq!(w.discordant(), (0, 0));
        }
        assert_eq!(w.rejection_percentage().unwrap(), 0.0);
    }

    #[test]
    fn drift_bookkeeping_is_consistent() {
        // Inverting every label halfway through forces drifts.
        let spec = SyntheticSpec::new(Family::Line, 1);
        let mut samples = crate::data::gen_concept(&spec, 3)
            .unwrap()
            .materialize()
            .unwrap();
        samples.truncate(10_000);
        for s in &mut samples[5000..] {
            s.label = 1 - s.label;
        }
        let mut settings = RunSettings::default();
        settings.pretrain_size = 1000;
        let r = run_arm(
            &samples,
            &LearnerKind::GaussianNb(Default::default()),
            &settings,
            Arm::Baseline,
        )
        .unwrap()
        .report;
        assert!(r.drifts >= 1);
        assert_eq!(r.drifts, r.learner_resets);
        assert_eq!(r.drifts, r.detector_resets);
    }

    #[test]
    fn improvements_reset_only_under_any_change() {
        // A tree that is still learning gets better after the warm start;
        // two-sided resets fire on that improvement, the default does not.
        let spec = crate::data::SeaSpec::new(1, 40_000);
        let samples = crate::data::gen_sea(&spec, 2)
            .unwrap()
            .materialize()
            .unwrap();
        let kind = LearnerKind::HoeffdingTree(Default::default());
        let mut settings = RunSettings::default();
        settings.pretrain_size = 500;
        let default = run_arm(&samples, &kind, &settings, Arm::Baseline)
            .unwrap()
            .report;
        settings.reset_on = ResetPolicy::AnyChange;
        let any = run_arm(&samples, &kind, &settings, Arm::Baseline)
            .unwrap()
            .report;
        assert!(
            any.drifts > default.drifts,
            "{} vs {}",
            any.drifts,
            default.drifts
        );
    }

    #[test]
    fn negative_raw_features_are_rescaled_for_mnb() {
        let samples: Vec<Sample> = (0..400)
            .map(|i| {
                let x = (i % 20) as f64 - 10.0;
                Sample::new(vec![x, -x], usize::from(x > 0.0))
            })
            .collect();
        let mut settings = RunSettings::default();
        settings.pretrain_size = 100;
        let kind = LearnerKind::MultinomialNb(MultinomialNbParams::default());
        run_arm(&samples, &kind, &settings, Arm::Baseline).unwrap();
        run_arm(&samples, &kind, &settings, Arm::Grf).unwrap();
    }

    #[test]
    fn errors_carry_sample_index() {
        let mut samples = vec![Sample::new(vec![0.0, 1.0], 0); 10];
        samples[7] = Sample::new(vec![0.0], 1);
        let mut settings = RunSettings::default();
        settings.pretrain_size = 3;
        let err =
            run_arm(&samples, &LearnerKind::Perceptron, &settings, Arm::Baseline).unwrap_err();
        assert!(matches!(err, Error::AtSample { index: 7, .. }), "{err}");
    }

    #[test]
    fn trajectory_checkpoints() {
        let mut c = small_config(LearnerKind::Perceptron);
        c.settings.trajectory_every = 500;
        let samples = load_samples(&c, 0).unwrap();
        let r = run_arm(&samples, &c.learner, &c.settings, Arm::Grf)
            .unwrap()
            .report;
        assert_eq!(r.kappa_trajectory.len(), 6);
        assert_eq!(r.kappa_trajectory.last().unwrap().1, r.kappa);
    }

    #[test]
    fn online_limits_run() {
        let mut c = small_config(LearnerKind::Perceptron);
        c.settings.grf.limits = LimitStrategy::OnlineUpdate;
        run_single(&c).unwrap();
    }
}
