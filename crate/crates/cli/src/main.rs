use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use grf_stream::encoding::{dump_encoding_grid, write_grid};
use grf_stream::harness::{
    run_paired, run_repeated, run_suite, write_paired_table, write_records, write_single_table,
    write_summary_table, PairedResult, RunRecord, TableOptions,
};
use grf_stream::{ExperimentConfig, FeatureRange, GrfConfig, RunOptions, Suite};

mod overrides;

/// Stream-learning experiments with Gaussian receptive field encoding.
#[derive(Parser, Debug)]
#[command(name = "grf-stream", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one arm (encoded unless --no-grf) for every repetition.
    Run {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Run the learner on raw features.
        #[arg(long)]
        no_grf: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare raw and encoded arms of one experiment.
    Pair {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every experiment of a suite file as a paired comparison.
    Suite {
        /// Suite file with one `[[experiment]]` table per entry.
        suite: PathBuf,
        /// Override applied to every entry, e.g. `repetitions=5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the receptive field responses over a feature range.
    DumpGrf {
        #[arg(long, allow_hyphen_values = true)]
        min: f64,
        #[arg(long, allow_hyphen_values = true)]
        max: f64,
        #[arg(long, default_value_t = 3)]
        n_grfs: usize,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        #[arg(long, default_value = "tab")]
        delimiter: String,
        /// Output file (default: stdout).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

/// Experiment definition: a config file plus overrides. Flags win over the
/// file, `--set` wins over flags.
#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    /// `FAMILY:CONCEPT` (circle, line, sine, sineH), `sea:FUNCTION` or `file:PATH`.
    #[arg(long)]
    dataset: Option<String>,
    /// knn, gaussian-nb, multinomial-nb, perceptron, passive-aggressive, sgd
    /// or hoeffding-tree, with default hyperparameters.
    #[arg(long)]
    learner: Option<String>,
    #[arg(long)]
    n_grfs: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// warm-start-fixed or online-update.
    #[arg(long)]
    limits: Option<String>,
    #[arg(long)]
    pretrain_size: Option<usize>,
    #[arg(long)]
    mcnemar_window: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// ADWIN confidence.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    buckets_per_row: Option<usize>,
    /// error-increase or any-change.
    #[arg(long)]
    reset_on: Option<String>,
    #[arg(long)]
    trajectory_every: Option<usize>,
    /// Any config field by dotted path, e.g. `learner.n_neighbors=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Worker threads.
    #[arg(long, short, default_value_t = 1)]
    jobs: usize,
    /// Leave out timing so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
    /// Result table (default: stdout).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Per-learner summary table (paired runs only).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// One JSON record per run and arm.
    #[arg(long)]
    records: Option<PathBuf>,
    /// Table delimiter: tab, comma or a single character.
    #[arg(long, default_value = "tab")]
    delimiter: String,
}

impl OutputArgs {
    fn table_options(&self) -> Result<TableOptions> {
        Ok(TableOptions {
            delimiter: parse_delimiter(&self.delimiter)?,
            include_timing: !self.no_timing,
        })
    }

    fn run_options(&self) -> Result<RunOptions> {
        if self.jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        Ok(RunOptions { jobs: self.jobs })
    }
}

fn parse_delimiter(s: &str) -> Result<u8> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        "comma" => Ok(b','),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => bail!("delimiter must be tab, comma or one ASCII character, got `{s}`"),
    }
}

fn read_table(path: &Path) -> Result<Table> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn experiment_config(args: &ExperimentArgs, no_grf: bool) -> Result<ExperimentConfig> {
    let mut t = match &args.config {
        Some(path) => read_table(path)?,
        None => Table::new(),
    };
    if let Some(d) = &args.dataset {
        t.insert("dataset".into(), overrides::dataset_table(d)?);
    }
    if let Some(l) = &args.learner {
        let mut learner = Table::new();
        learner.insert("kind".into(), l.as_str().into());
        t.insert("learner".into(), Value::Table(learner));
    }
    let int = |v: usize| Value::Integer(v as i64);
    let typed: [(&str, Option<Value>); 13] = [
        ("name", args.name.clone().map(Value::String)),
        ("grf.n_grfs", args.n_grfs.map(int)),
        ("grf.gamma", args.gamma.map(Value::Float)),
        ("grf.limits", args.limits.clone().map(Value::String)),
        ("grf.enabled", no_grf.then_some(Value::Boolean(false))),
        ("pretrain_size", args.pretrain_size.map(int)),
        ("mcnemar_window", args.mcnemar_window.map(int)),
        ("repetitions", args.repetitions.map(int)),
        ("seed", args.seed.map(|s| Value::Integer(s as i64))),
        ("drift.delta", args.delta.map(Value::Float)),
        ("drift.buckets_per_row", args.buckets_per_row.map(int)),
        ("reset_on", args.reset_on.clone().map(Value::String)),
        ("trajectory_every", args.trajectory_every.map(int)),
    ];
    for (key, value) in typed {
        if let Some(v) = value {
            overrides::set_path(&mut t, key, v)?;
        }
    }
    for s in &args.set {
        overrides::apply_assignment(&mut t, s)?;
    }
    if !t.contains_key("dataset") || !t.contains_key("learner") {
        bail!("an experiment needs a dataset and a learner (--config, --dataset, --learner)");
    }
    Ok(ExperimentConfig::from_toml_str(&toml::to_string(&t)?)?)
}

fn load_suite(path: &Path, sets: &[String]) -> Result<Suite> {
    let mut t = read_table(path)?;
    if !sets.is_empty() {
        let Some(Value::Array(entries)) = t.get_mut("experiment") else {
            bail!("{}: no [[experiment]] entries", path.display());
        };
        for entry in entries {
            let Value::Table(entry) = entry else {
                bail!("{}: experiment entries must be tables", path.display());
            };
            for s in sets {
                overrides::apply_assignment(entry, s)?;
            }
        }
    }
    Suite::from_toml_str(&toml::to_string(&t)?)
        .with_context(|| format!("parsing {}", path.display()))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        None => Box::new(io::stdout().lock()),
        Some(p) if p == Path::new("-") => Box::new(io::stdout().lock()),
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
    })
}

fn write_records_to(records: &[RunRecord], output: &OutputArgs) -> Result<()> {
    if let Some(path) = &output.records {
        let mut out = sink(Some(path))?;
        write_records(records, !output.no_timing, &mut out)?;
        out.flush()?;
    }
    Ok(())
}

fn write_paired(results: &[PairedResult], output: &OutputArgs) -> Result<()> {
    let opts = output.table_options()?;
    let mut out = sink(output.table.as_deref())?;
    write_paired_table(results, opts, &mut out)?;
    out.flush()?;
    if let Some(path) = &output.summary {
        let mut out = sink(Some(path))?;
        write_summary_table(results, opts, &mut out)?;
        out.flush()?;
    }
    let records: Vec<RunRecord> = results.iter().flat_map(PairedResult::records).collect();
    write_records_to(&records, output)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            experiment,
            no_grf,
            output,
        } => {
            let config = experiment_config(&experiment, no_grf)?;
            let opts = output.table_options()?;
            let records = run_repeated(&config, output.run_options()?)?;
            let mut out = sink(output.table.as_deref())?;
            write_single_table(&records, opts, &mut out)?;
            out.flush()?;
            write_records_to(&records, &output)?;
        }
        Command::Pair { experiment, output } => {
            let config = experiment_config(&experiment, false)?;
            output.table_options()?;
            let result = run_paired(&config, output.run_options()?)?;
            write_paired(&[result], &output)?;
        }
        Command::Suite { suite, set, output } => {
            let suite = load_suite(&suite, &set)?;
            output.table_options()?;
            let outcome = run_suite(&suite, output.run_options()?)?;
            write_paired(&outcome.results, &output)?;
            for (label, err) in &outcome.failures {
                eprintln!("error: {label}: {err}");
            }
            if !outcome.is_success() {
                eprintln!(
                    "{} of {} experiments failed",
                    outcome.failures.len(),
                    outcome.failures.len() + outcome.results.len()
                );
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::DumpGrf {
            min,
            max,
            n_grfs,
            gamma,
            resolution,
            delimiter,
            output,
        } => {
            let range = FeatureRange::new(min, max)?;
            let config = GrfConfig::new(n_grfs, gamma)?;
            let rows = dump_encoding_grid(range, &config, resolution)?;
            let mut out = sink(output.as_deref())?;
            write_grid(&rows, parse_delimiter(&delimiter)?, &mut out)?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
