//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use grf_stream::data::{DatasetSpec, Family, SeaSpec, SyntheticSpec};
use grf_stream::encoding::{build_fields, encode_feature, FeatureRange, GrfConfig};
use grf_stream::eval::{mcnemar_statistic, EvalLedger, McNemarWindow, MCNEMAR_CRITICAL};
use grf_stream::harness::{
    run_paired, run_suite, write_paired_table, write_records, write_summary_table, Arm,
    ExperimentConfig, RunOptions, Suite, TableOptions,
};
use grf_stream::learners::LearnerKind;
use grf_stream::{Adwin, AdwinParams};

type Outcome = Result<String, String>;

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, elapsed: Duration, outcome: Outcome) -> Outcome {
    let timing = format!("{:.1}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
    match outcome {
        Ok(d) if elapsed <= limit => Ok(format!("{d}; {timing}")),
        Ok(d) => Err(format!("{d}; too slow: {timing}")),
        Err(d) => Err(format!("{d}; {timing}")),
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

// ---------------------------------------------------------------- encoder

/// Uniform draw from `[lo, hi]` rounded to a multiple of `2^-bits`.
fn dyadic(rng: &mut ChaCha8Rng, lo: f64, hi: f64, bits: i32) -> f64 {
    let scale = 2f64.powi(bits);
    (rng.gen_range(lo..=hi) * scale).round() / scale
}

fn encoder_invariants() -> Outcome {
    const CASES: usize = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_affine = 0.0f64;
    let mut failures = Vec::new();

    for case in 0..CASES {
        let n = rng.gen_range(3..=12);
        let gamma = rng.gen_range(0.1..6.0);
        let config = GrfConfig::new(n, gamma).unwrap();
        // Values sit on a dyadic grid so that the affine images below are
        // exact; the check then measures the encoder, not input rounding.
        let min = dyadic(&mut rng, -10.0, 10.0, 20);
        let span = dyadic(&mut rng, 0.5, 10.0, 20);
        let range = FeatureRange::new(min, min + span).unwrap();
        let fields = build_fields(range, &config);
        let x = dyadic(&mut rng, min, min + span, 20);
        let code = encode_feature(x, &fields);

        // length
        if code.len() != n {
            failures.push(format!("case {case}: length {}", code.len()));
        }
        // range
        if !code.iter().all(|&v| v > 0.0 && v <= 1.0) {
            failures.push(format!("case {case}: value outside (0, 1]"));
        }
        // center
        for (i, f) in fields.iter().enumerate() {
            if encode_feature(f.center, &fields)[i] != 1.0 {
                failures.push(format!("case {case}: field {i} not 1 at its center"));
            }
        }
        // unimodality: non-decreasing up to the peak, non-increasing after
        let peak = (0..n).fold(0, |p, i| if code[i] > code[p] { i } else { p });
        let rises = code[..=peak].windows(2).all(|w| w[0] <= w[1]);
        let falls = code[peak..].windows(2).all(|w| w[0] >= w[1]);
        if !(rises && falls) {
            failures.push(format!("case {case}: not unimodal {code:?}"));
        }
        // affine invariance
        let alpha = dyadic(&mut rng, 0.1, 10.0, 6);
        let beta = dyadic(&mut rng, -10.0, 10.0, 20);
        let moved = FeatureRange::new(alpha * range.min + beta, alpha * range.max + beta).unwrap();
        let moved_code = encode_feature(alpha * x + beta, &build_fields(moved, &config));
        for (a, b) in code.iter().zip(&moved_code) {
            worst_affine = worst_affine.max(rel_err(*a, *b));
        }
        // symmetry on (0, 1)
        let unit = build_fields(FeatureRange::new(0.0, 1.0).unwrap(), &config);
        let u = rng.gen_range(0.0..=1.0);
        let mut fwd = encode_feature(u, &unit);
        fwd.reverse();
        let back = encode_feature(1.0 - u, &unit);
        if fwd.iter().zip(&back).any(|(a, b)| rel_err(*a, *b) > 1e-9) {
            failures.push(format!("case {case}: asymmetric at {u}"));
        }
    }
    if worst_affine > 1e-12 {
        failures.push(format!("affine relative error {worst_affine:e}"));
    }
    let detail = format!("{CASES} cases, worst affine rel err {worst_affine:.1e}");
    match failures.first() {
        None => Ok(detail),
        Some(f) => Err(format!("{detail}; {} failures, first: {f}", failures.len())),
    }
}

// ---------------------------------------------------------------- oracles

fn batch_kappa(pairs: &[(usize, usize)], classes: usize) -> f64 {
    let n = pairs.len() as f64;
    let correct = pairs.iter().filter(|(p, t)| p == t).count() as f64;
    let p0 = correct / n;
    let pc: f64 = (0..classes)
        .map(|c| {
            let t = pairs.iter().filter(|(_, y)| *y == c).count() as f64;
            let p = pairs.iter().filter(|(q, _)| *q == c).count() as f64;
            (t / n) * (p / n)
        })
        .sum();
    if pc == 1.0 {
        0.0
    } else {
        (p0 - pc) / (1.0 - pc)
    }
}

fn kappa_mcnemar_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_kappa = 0.0f64;
    let mut worst_m = 0.0f64;
    for _ in 0..1000 {
        let len = rng.gen_range(1..400);
        let classes = rng.gen_range(2..5);
        let skill = rng.gen_range(0.0..1.0);
        let pairs: Vec<(usize, usize)> = (0..len)
            .map(|_| {
                let t = rng.gen_range(0..classes);
                let p = if rng.gen_bool(skill) {
                    t
                } else {
                    rng.gen_range(0..classes)
                };
                (p, t)
            })
            .collect();
        let mut ledger = EvalLedger::new();
        for &(p, t) in &pairs {
            ledger.record(p, t);
        }
        let k = ledger.kappa().map_err(|e| e.to_string())?;
        worst_kappa = worst_kappa.max((k - batch_kappa(&pairs, classes)).abs());

        let w = rng.gen_range(1..100);
        let mut window = McNemarWindow::new(w).unwrap();
        let errs: Vec<(bool, bool)> = (0..len)
            .map(|_| (rng.gen_bool(0.3), rng.gen_bool(0.4)))
            .collect();
        for (i, &(x, y)) in errs.iter().enumerate() {
            window.step(x, y);
            let tail = &errs[(i + 1).saturating_sub(w)..=i];
            let a = tail.iter().filter(|(x, y)| *x && !*y).count() as u64;
            let b = tail.iter().filter(|(x, y)| !*x && *y).count() as u64;
            let brute = if a + b == 0 {
                0.0
            } else {
                (a as f64 - b as f64).powi(2) / (a + b) as f64
            };
            worst_m = worst_m.max((window.statistic() - brute).abs());
        }
    }
    let m30 = mcnemar_statistic(30, 10);
    let rejects = m30 == 10.0 && m30 > MCNEMAR_CRITICAL;
    let equal_ok = (0..200).all(|a| mcnemar_statistic(a, a) <= MCNEMAR_CRITICAL);
    check(
        worst_kappa <= 1e-12 && worst_m <= 1e-12 && rejects && equal_ok,
        format!(
            "kappa err {worst_kappa:.1e}, M err {worst_m:.1e}, M(30,10)={m30}, a=b never rejects: {equal_ok}"
        ),
    )
}

// ---------------------------------------------------------------- ADWIN

fn adwin_properties() -> Outcome {
    let params = AdwinParams {
        delta: 0.002,
        buckets_per_row: 32,
    };
    let detected: usize = (0..200u64)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut adwin = Adwin::new(params.clone()).unwrap();
            let mut hit = false;
            for t in 0..2000 {
                let p = if t < 1000 { 0.2 } else { 0.8 };
                let x = f64::from(u8::from(rng.gen_bool(p)));
                if adwin.add_element(x).unwrap() {
                    adwin.reset();
                    if (1000..1300).contains(&t) {
                        hit = true;
                    }
                }
            }
            hit
        })
        .count();

    let false_positives: usize = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..100u64)
            .map(|seed| {
                let params = params.clone();
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
                    let mut adwin = Adwin::new(params).unwrap();
                    let mut fp = 0;
                    for _ in 0..100_000 {
                        if adwin
                            .add_element(f64::from(u8::from(rng.gen_bool(0.5))))
                            .unwrap()
                        {
                            fp += 1;
                            adwin.reset();
                        }
                    }
                    fp
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    check(
        detected >= 190 && false_positives <= 5,
        format!("detected within 300 in {detected}/200 seeds, {false_positives} false positives"),
    )
}

// ---------------------------------------------------------------- paired runs

fn circle_config(learner: LearnerKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        DatasetSpec::Synthetic(SyntheticSpec::new(Family::Circle, 1)),
        learner,
    );
    c.settings.pretrain_size = 12_500;
    c.settings.grf.gamma = 2.0;
    c.settings.grf.n_grfs = 3;
    c.settings.repetitions = 5;
    c
}

fn circle_gap() -> Outcome {
    let learners = [
        LearnerKind::MultinomialNb(Default::default()),
        LearnerKind::Sgd(Default::default()),
        LearnerKind::Perceptron,
        LearnerKind::PassiveAggressive(Default::default()),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for learner in learners {
        let c = circle_config(learner);
        let r = run_paired(&c, RunOptions { jobs: jobs() }).map_err(|e| e.to_string())?;
        let (kb, kg) = (r.kappa(Arm::Baseline).mean, r.kappa(Arm::Grf).mean);
        let m = r.mcnemar().mean;
        ok &= kg - kb >= 0.5 && m > 50.0;
        parts.push(format!("{} {kb:.3}->{kg:.3} mcnemar {m:.1}%", r.learner));
    }
    check(ok, parts.join(", "))
}

fn sea_non_harm() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for learner in [
        LearnerKind::HoeffdingTree(Default::default()),
        LearnerKind::GaussianNb(Default::default()),
    ] {
        let mut c = ExperimentConfig::new(DatasetSpec::Sea(SeaSpec::new(1, 50_000)), learner);
        c.settings.pretrain_size = 12_500;
        c.settings.repetitions = 5;
        let r = run_paired(&c, RunOptions { jobs: jobs() }).map_err(|e| e.to_string())?;
        let (kb, kg) = (r.kappa(Arm::Baseline).mean, r.kappa(Arm::Grf).mean);
        ok &= (kg - kb).abs() <= 0.15 && kb >= 0.4;
        parts.push(format!("{} {kb:.3}->{kg:.3}", r.learner));
    }
    check(ok, parts.join(", "))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn synthetic_suite() -> Suite {
    let mut configs = Vec::new();
    for family in Family::all() {
        for concept in [1, 2] {
            for learner in LearnerKind::all_defaults() {
                let mut c = ExperimentConfig::new(
                    DatasetSpec::Synthetic(SyntheticSpec::new(family, concept)),
                    learner,
                );
                c.settings.repetitions = 5;
                configs.push(c);
            }
        }
    }
    Suite::from_configs(configs)
}

fn cost_trend() -> Outcome {
    // Timed runs stay on one worker so arms are compared like for like.
    let suite = synthetic_suite();
    let outcome = run_suite(&suite, RunOptions { jobs: 1 }).map_err(|e| e.to_string())?;
    if let Some((name, e)) = outcome.failures.first() {
        return Err(format!("{name}: {e}"));
    }
    let slower: Vec<String> = outcome
        .results
        .iter()
        .filter(|r| {
            let t = |arm| median(r.arm(arm).iter().map(|x| x.processing_time_s).collect());
            t(Arm::Grf) <= t(Arm::Baseline)
        })
        .map(|r| r.experiment.clone())
        .collect();

    let mut worst_ratio = 0.0f64;
    let mut worst_learner = "";
    for learner in LearnerKind::all_defaults() {
        let time_at = |n_grfs: usize| -> Result<f64, String> {
            let mut c = circle_config(learner.clone());
            c.settings.grf.n_grfs = n_grfs;
            let r = run_paired(&c, RunOptions { jobs: 1 }).map_err(|e| e.to_string())?;
            Ok(median(r.grf.iter().map(|x| x.processing_time_s).collect()))
        };
        let ratio = time_at(6)? / time_at(3)?;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_learner = learner.name();
        }
    }
    check(
        slower.is_empty() && worst_ratio <= 2.5,
        format!(
            "{}/{} entries slower with GRF{}; worst n_grfs 3->6 ratio {worst_ratio:.2} ({worst_learner})",
            outcome.results.len() - slower.len(),
            outcome.results.len(),
            if slower.is_empty() { String::new() } else { format!(" (not: {})", slower.join(", ")) },
        ),
    )
}

fn ht_on_line() -> Outcome {
    let mut c = ExperimentConfig::new(
        DatasetSpec::Synthetic(SyntheticSpec::new(Family::Line, 1)),
        LearnerKind::HoeffdingTree(Default::default()),
    );
    c.settings.grf.enabled = false;
    c.settings.repetitions = 5;
    let records = grf_stream::harness::run_repeated(&c, RunOptions { jobs: jobs() })
        .map_err(|e| e.to_string())?;
    let worst = records
        .iter()
        .map(|r| r.report.kappa)
        .fold(f64::INFINITY, f64::min);
    check(
        worst >= 0.9,
        format!("lowest Kappa over {} runs {worst:.3}", records.len()),
    )
}

fn suite_bytes(suite: &Suite) -> Result<Vec<u8>, String> {
    let outcome = run_suite(suite, RunOptions { jobs: jobs() }).map_err(|e| e.to_string())?;
    let opts = TableOptions {
        delimiter: b'\t',
        include_timing: false,
    };
    let mut out = Vec::new();
    write_paired_table(&outcome.results, opts, &mut out).map_err(|e| e.to_string())?;
    write_summary_table(&outcome.results, opts, &mut out).map_err(|e| e.to_string())?;
    write_records(&outcome.records(), false, &mut out).map_err(|e| e.to_string())?;
    Ok(out)
}

fn determinism() -> Outcome {
    let suite = Suite::from_toml_str(
        r#"
[[experiment]]
repetitions = 3
pretrain_size = 2000
dataset = [
  { type = "synthetic", family = "sine", concept = 1, replications = 10 },
  { type = "sea", function = 2, n_samples = 10000 },
]
learner = [
  { kind = "knn" }, { kind = "gaussian-nb" }, { kind = "multinomial-nb" },
  { kind = "perceptron" }, { kind = "passive-aggressive" }, { kind = "sgd" },
  { kind = "hoeffding-tree" },
]
"#,
    )
    .map_err(|e| e.to_string())?;
    let a = suite_bytes(&suite)?;
    let b = suite_bytes(&suite)?;
    check(
        a == b && !a.is_empty(),
        format!("{} bytes, identical: {}", a.len(), a == b),
    )
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 8] = [
        ("encoder invariants", 10, encoder_invariants),
        ("kappa/mcnemar oracles", 5, kappa_mcnemar_oracles),
        ("adwin detection and false positives", 60, adwin_properties),
        (
            "circle concept 1: grf gap for MNB/SGD/Perceptron/PA",
            300,
            circle_gap,
        ),
        ("sea f1: grf non-harm for HT/GNB", 180, sea_non_harm),
        ("cost trend", 900, cost_trend),
        ("hoeffding tree on line concept", 300, ht_on_line),
        ("suite determinism", 300, determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, limit, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let outcome = within(Duration::from_secs(limit), start.elapsed(), outcome);
        match outcome {
            Ok(d) => println!("PASS {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
