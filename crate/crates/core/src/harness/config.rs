use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::DatasetSpec;
use crate::drift::AdwinParams;
use crate::encoding::{GrfConfig, LimitStrategy};
use crate::error::{Error, Result};
use crate::learners::LearnerKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrfSettings {
    /// Whether single-arm runs encode. Paired runs always do both.
    pub enabled: bool,
    pub n_grfs: usize,
    pub gamma: f64,
    pub limits: LimitStrategy,
}

impl Default for GrfSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            n_grfs: 3,
            gamma: 2.0,
            limits: LimitStrategy::WarmStartFixed,
        }
    }
}

impl GrfSettings {
    pub fn config(&self) -> Result<GrfConfig> {
        GrfConfig::new(self.n_grfs, self.gamma)
    }
}

/// Which detector changes count as drift and reset learner and detector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResetPolicy {
    /// Only changes where the error rate went up. A learner that is still
    /// improving is left alone (the detector still shrinks its window).
    #[default]
    ErrorIncrease,
    /// Every change in either direction.
    AnyChange,
}

/// Everything about a run except what is being run on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSettings {
    pub grf: GrfSettings,
    /// Samples used for the warm start and to fix the encoder limits.
    pub pretrain_size: usize,
    pub mcnemar_window: usize,
    pub repetitions: usize,
    /// Repetition `r` uses seed `seed + r`.
    pub seed: u64,
    pub drift: AdwinParams,
    pub reset_on: ResetPolicy,
    /// Record the running Kappa every this many evaluated samples (0: off).
    pub trajectory_every: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            grf: GrfSettings::default(),
            pretrain_size: 12_500,
            mcnemar_window: 500,
            repetitions: 25,
            seed: 1,
            drift: AdwinParams::default(),
            reset_on: ResetPolicy::default(),
            trajectory_every: 0,
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        self.grf.config()?;
        self.drift.validate()?;
        if self.pretrain_size == 0 {
            return Err(Error::Config("pretrain_size must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.mcnemar_window == 0 {
            return Err(Error::Config("mcnemar_window must be at least 1".into()));
        }
        Ok(())
    }
}

/// One experiment: a dataset, a learner and the run settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dataset: DatasetSpec,
    pub learner: LearnerKind,
    #[serde(flatten)]
    pub settings: RunSettings,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSpec, learner: LearnerKind) -> Self {
        Self {
            name: None,
            dataset,
            learner,
            settings: RunSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.settings.validate()?;
        self.learner.validate()
    }

    /// Display name: the explicit name, or `<dataset>/<learner>`.
    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}/{}", self.dataset.name(), self.learner.name()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Suite entry; `dataset` and `learner` may be lists, expanding to every
/// dataset/learner combination (datasets outermost).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dataset: OneOrMany<DatasetSpec>,
    pub learner: OneOrMany<LearnerKind>,
    #[serde(flatten)]
    pub settings: RunSettings,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    #[serde(default, rename = "experiment")]
    pub entries: Vec<SuiteEntry>,
}

impl Suite {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_configs(configs: impl IntoIterator<Item = ExperimentConfig>) -> Self {
        Self {
            entries: configs
                .into_iter()
                .map(|c| SuiteEntry {
                    name: c.name,
                    dataset: OneOrMany::One(c.dataset),
                    learner: OneOrMany::One(c.learner),
                    settings: c.settings,
                })
                .collect(),
        }
    }

    /// Flattens entries into individual experiments, in file order.
    pub fn experiments(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::new();
        for entry in &self.entries {
            let datasets = entry.dataset.to_vec();
            let learners = entry.learner.to_vec();
            let many = datasets.len() * learners.len() > 1;
            for dataset in &datasets {
                for learner in &learners {
                    let mut config = ExperimentConfig {
                        name: entry.name.clone(),
                        dataset: dataset.clone(),
                        learner: learner.clone(),
                        settings: entry.settings.clone(),
                    };
                    if many {
                        let base = format!("{}/{}", dataset.name(), learner.name());
                        config.name = Some(match &entry.name {
                            Some(n) => format!("{n}:{base}"),
                            None => base,
                        });
                    }
                    out.push(config);
                }
            }
        }
        out
    }
}
