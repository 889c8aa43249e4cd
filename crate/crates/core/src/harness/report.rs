use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::Arm;
use crate::error::Result;
use crate::eval::RunReport;

/// Mean and sample standard deviation over repetitions. The deviation is
/// absent for a single repetition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        if values.is_empty() {
            return Stat {
                mean: f64::NAN,
                std: None,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.len() > 1)
            .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        Stat { mean, std }
    }
}

/// One arm of one repetition, as written to the per-run record file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub dataset: String,
    pub learner: String,
    pub arm: Arm,
    pub repetition: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub report: RunReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcnemar_pct: Option<f64>,
}

impl RunRecord {
    pub fn new(
        config: &ExperimentConfig,
        repetition: usize,
        arm: Arm,
        report: RunReport,
        mcnemar_pct: Option<f64>,
    ) -> Self {
        Self {
            experiment: config.label(),
            dataset: config.dataset.name(),
            learner: config.learner.name().to_owned(),
            arm,
            repetition,
            seed: config.settings.seed.wrapping_add(repetition as u64),
            report,
            mcnemar_pct,
        }
    }
}

/// Baseline and encoded arms of one experiment across repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedResult {
    pub experiment: String,
    pub dataset: String,
    pub learner: String,
    pub seed: u64,
    pub baseline: Vec<RunReport>,
    pub grf: Vec<RunReport>,
    pub mcnemar_pct: Vec<f64>,
}

impl PairedResult {
    pub fn from_runs(config: &ExperimentConfig, runs: Vec<(RunReport, RunReport, f64)>) -> Self {
        let mut out = Self {
            experiment: config.label(),
            dataset: config.dataset.name(),
            learner: config.learner.name().to_owned(),
            seed: config.settings.seed,
            baseline: Vec::with_capacity(runs.len()),
            grf: Vec::with_capacity(runs.len()),
            mcnemar_pct: Vec::with_capacity(runs.len()),
        };
        for (b, g, m) in runs {
            out.baseline.push(b);
            out.grf.push(g);
            out.mcnemar_pct.push(m);
        }
        out
    }

    pub fn repetitions(&self) -> usize {
        self.baseline.len()
    }

    pub fn kappa(&self, arm: Arm) -> Stat {
        let reports = self.arm(arm);
        Stat::of(&reports.iter().map(|r| r.kappa).collect::<Vec<_>>())
    }

    pub fn time(&self, arm: Arm) -> Stat {
        let reports = self.arm(arm);
        Stat::of(
            &reports
                .iter()
                .map(|r| r.processing_time_s)
                .collect::<Vec<_>>(),
        )
    }

    pub fn mcnemar(&self) -> Stat {
        Stat::of(&self.mcnemar_pct)
    }

    pub fn arm(&self, arm: Arm) -> &[RunReport] {
        match arm {
            Arm::Baseline => &self.baseline,
            Arm::Grf => &self.grf,
        }
    }

    pub fn without_timing(&self) -> Self {
        Self {
            baseline: self
                .baseline
                .iter()
                .map(RunReport::without_timing)
                .collect(),
            grf: self.grf.iter().map(RunReport::without_timing).collect(),
            ..self.clone()
        }
    }

    /// Two records (baseline, grf) per repetition.
    pub fn records(&self) -> Vec<RunRecord> {
        let mut out = Vec::with_capacity(2 * self.repetitions());
        for rep in 0..self.repetitions() {
            for arm in [Arm::Baseline, Arm::Grf] {
                out.push(RunRecord {
                    experiment: self.experiment.clone(),
                    dataset: self.dataset.clone(),
                    learner: self.learner.clone(),
                    arm,
                    repetition: rep,
                    seed: self.seed.wrapping_add(rep as u64),
                    report: self.arm(arm)[rep].clone(),
                    mcnemar_pct: Some(self.mcnemar_pct[rep]),
                });
            }
        }
        out
    }
}

/// Formatting of the delimiter-separated tables.
#[derive(Clone, Copy, Debug)]
pub struct TableOptions {
    pub delimiter: u8,
    /// Timing columns vary run to run; leaving them out makes output
    /// byte-reproducible.
    pub include_timing: bool,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            delimiter: b'\t',
            include_timing: true,
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn std_cell(s: Stat) -> String {
    s.std.map(num).unwrap_or_default()
}

fn writer<W: Write>(out: W, opts: TableOptions) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .delimiter(opts.delimiter)
        .from_writer(out)
}

/// One row per experiment: Kappa of both arms, McNemar rejection percentage
/// and processing time, each as mean and standard deviation.
pub fn write_paired_table<W: Write>(
    results: &[PairedResult],
    opts: TableOptions,
    out: W,
) -> Result<()> {
    let mut w = writer(out, opts);
    let mut header = vec![
        "experiment",
        "dataset",
        "learner",
        "repetitions",
        "kappa_baseline",
        "kappa_baseline_std",
        "kappa_grf",
        "kappa_grf_std",
        "mcnemar_pct",
    ];
    if opts.include_timing {
        header.extend([
            "time_baseline_s",
            "time_baseline_std",
            "time_grf_s",
            "time_grf_std",
        ]);
    }
    w.write_record(&header)?;
    for r in results {
        let (kb, kg) = (r.kappa(Arm::Baseline), r.kappa(Arm::Grf));
        let mut row = vec![
            r.experiment.clone(),
            r.dataset.clone(),
            r.learner.clone(),
            r.repetitions().to_string(),
            num(kb.mean),
            std_cell(kb),
            num(kg.mean),
            std_cell(kg),
            num(r.mcnemar().mean),
        ];
        if opts.include_timing {
            let (tb, tg) = (r.time(Arm::Baseline), r.time(Arm::Grf));
            row.extend([num(tb.mean), std_cell(tb), num(tg.mean), std_cell(tg)]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-learner means over all experiments, learners in first-seen order.
pub fn write_summary_table<W: Write>(
    results: &[PairedResult],
    opts: TableOptions,
    out: W,
) -> Result<()> {
    let mut learners: Vec<&str> = Vec::new();
    for r in results {
        if !learners.contains(&r.learner.as_str()) {
            learners.push(&r.learner);
        }
    }
    let mut w = writer(out, opts);
    let mut header = vec![
        "learner",
        "experiments",
        "kappa_baseline",
        "kappa_grf",
        "mcnemar_pct",
    ];
    if opts.include_timing {
        header.extend(["time_baseline_s", "time_grf_s"]);
    }
    w.write_record(&header)?;
    for learner in learners {
        let rows: Vec<&PairedResult> = results.iter().filter(|r| r.learner == learner).collect();
        let mean = |f: &dyn Fn(&PairedResult) -> f64| {
            Stat::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>()).mean
        };
        let mut row = vec![
            learner.to_owned(),
            rows.len().to_string(),
            num(mean(&|r| r.kappa(Arm::Baseline).mean)),
            num(mean(&|r| r.kappa(Arm::Grf).mean)),
            num(mean(&|r| r.mcnemar().mean)),
        ];
        if opts.include_timing {
            row.push(num(mean(&|r| r.time(Arm::Baseline).mean)));
            row.push(num(mean(&|r| r.time(Arm::Grf).mean)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Single-arm runs grouped by experiment: mean and std of Kappa and time.
pub fn write_single_table<W: Write>(
    records: &[RunRecord],
    opts: TableOptions,
    out: W,
) -> Result<()> {
    let mut w = writer(out, opts);
    let mut header = vec![
        "experiment",
        "dataset",
        "learner",
        "arm",
        "repetitions",
        "kappa",
        "kappa_std",
    ];
    if opts.include_timing {
        header.extend(["time_s", "time_std"]);
    }
    w.write_record(&header)?;
    let mut i = 0;
    while i < records.len() {
        let first = &records[i];
        let group: Vec<&RunRecord> = records[i..]
            .iter()
            .take_while(|r| r.experiment == first.experiment && r.arm == first.arm)
            .collect();
        i += group.len();
        let kappa = Stat::of(&group.iter().map(|r| r.report.kappa).collect::<Vec<_>>());
        let mut row = vec![
            first.experiment.clone(),
            first.dataset.clone(),
            first.learner.clone(),
            first.arm.name().to_owned(),
            group.len().to_string(),
            num(kappa.mean),
            std_cell(kappa),
        ];
        if opts.include_timing {
            let time = Stat::of(
                &group
                    .iter()
                    .map(|r| r.report.processing_time_s)
                    .collect::<Vec<_>>(),
            );
            row.extend([num(time.mean), std_cell(time)]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One flat JSON object per line.
pub fn write_records<W: Write>(
    records: &[RunRecord],
    include_timing: bool,
    mut out: W,
) -> Result<()> {
    for record in records {
        let mut value = serde_json::to_value(record)?;
        if !include_timing {
            if let Some(obj) = value.as_object_mut() {
                obj.remove("processing_time_s");
            }
        }
        serde_json::to_writer(&mut out, &value)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
