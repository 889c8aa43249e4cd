//! Experiment orchestration: warm start, prequential runs, paired
//! baseline-vs-encoded comparisons, repetitions and suites.

mod config;
mod report;
mod run;

pub use config::{
    ExperimentConfig, GrfSettings, OneOrMany, ResetPolicy, RunSettings, Suite, SuiteEntry,
};
pub use report::{
    write_paired_table, write_records, write_single_table, write_summary_table, PairedResult,
    RunRecord, Stat, TableOptions,
};
pub use run::{
    load_samples, run_arm, run_paired, run_paired_once, run_repeated, run_single, Arm, ArmOutcome,
    RunOptions,
};

use crate::error::Error;

/// Results of a suite. Failed experiments are skipped and listed.
#[derive(Debug, Default)]
pub struct SuiteOutcome {
    pub results: Vec<PairedResult>,
    pub failures: Vec<(String, Error)>,
}

impl SuiteOutcome {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn records(&self) -> Vec<RunRecord> {
        self.results
            .iter()
            .flat_map(PairedResult::records)
            .collect()
    }
}

/// Runs every experiment of `suite` as a paired comparison. Experiments are
/// spread over `options.jobs` workers; each run is timed on a single worker.
pub fn run_suite(suite: &Suite, options: RunOptions) -> crate::error::Result<SuiteOutcome> {
    let experiments = suite.experiments();
    let outcomes = run::map_jobs(experiments, options, |config| {
        let label = config.label();
        (label, run_paired(&config, RunOptions::default()))
    })?;
    let mut out = SuiteOutcome::default();
    for (label, result) in outcomes {
        match result {
            Ok(r) => out.results.push(r),
            Err(e) => out.failures.push((label, e)),
        }
    }
    Ok(out)
}
