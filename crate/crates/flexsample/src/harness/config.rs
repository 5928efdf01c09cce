//! The resolved, serializable description of one experiment.
//!
//! A config comes from three layers: built-in defaults, an optional TOML
//! file, and CLI flag overrides applied by the binary. The fully resolved
//! struct is echoed into every run manifest, so a manifest alone suffices to
//! rerun its experiment.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::curriculum::CurriculumLimits;
use crate::data::BenchmarkSpec;
use crate::error::{Error, Result};
use crate::proto::SelectionMode;
use crate::ssl::ContrastiveConfig;

use super::GroupThresholds;

/// Training strategy for one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain cross entropy on instance-uniform batches.
    Ce,
    /// Class-uniform resampling.
    Rs,
    /// Inverse-frequency loss weights.
    Rw,
    /// Focal loss.
    Focal,
    /// Effective-number loss weights.
    Cb,
    /// The full pipeline: pretrained encoder, anchor subset, curriculum
    /// querying from the pool.
    Flexible,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ce => "ce",
            Method::Rs => "rs",
            Method::Rw => "rw",
            Method::Focal => "focal",
            Method::Cb => "cb",
            Method::Flexible => "flexible",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ce" => Ok(Method::Ce),
            "rs" => Ok(Method::Rs),
            "rw" => Ok(Method::Rw),
            "focal" => Ok(Method::Focal),
            "cb" => Ok(Method::Cb),
            "flexible" => Ok(Method::Flexible),
            other => Err(Error::Usage(format!(
                "unknown method '{other}' (expected ce, rs, rw, focal, cb, or flexible)"
            ))),
        }
    }
}

/// How the encoder is pretrained before prototypes are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PretrainKind {
    /// Supervised warm-up of the same architecture; encoder taken from its
    /// first two layers.
    Ce,
    /// Contrastive pretraining.
    Ssl,
}

impl FromStr for PretrainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ce" => Ok(PretrainKind::Ce),
            "ssl" => Ok(PretrainKind::Ssl),
            other => Err(Error::Usage(format!(
                "unknown pretrain kind '{other}' (expected ce or ssl)"
            ))),
        }
    }
}

/// How pool instances are scored during a query round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryStrategy {
    Random,
    MutualInformation,
}

impl FromStr for QueryStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(QueryStrategy::Random),
            "mi" | "mutual_information" => Ok(QueryStrategy::MutualInformation),
            other => Err(Error::Usage(format!(
                "unknown query strategy '{other}' (expected random or mi)"
            ))),
        }
    }
}

/// Architecture and optimizer settings of the classifier.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    pub dropout: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Learning rate of the fresh optimizer after every query round.
    pub requery_learning_rate: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 64,
            embedding_dim: 32,
            dropout: 0.2,
            batch_size: 16,
            learning_rate: 1e-3,
            requery_learning_rate: 3e-4,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.embedding_dim == 0 {
            return Err(Error::Config("classifier dims must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        for (name, lr) in [
            ("learning_rate", self.learning_rate),
            ("requery_learning_rate", self.requery_learning_rate),
        ] {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {lr}")));
            }
        }
        Ok(())
    }
}

/// Everything one experiment needs, with defaults for every field; a bare
/// `run --method flexible` works without a config file.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub method: Method,
    /// Independent repetitions with seeds `seed .. seed + trials`.
    pub trials: usize,
    pub seed: u64,
    /// Anchor-subset scaling factor s; the subset's imbalance ratio is r*s.
    pub scaling: f64,
    pub pretrain: PretrainKind,
    pub selection: SelectionMode,
    pub querying: QueryStrategy,
    /// Epochs trained on the anchor subset before the first query may fire.
    pub warmup_epochs: usize,
    /// Stochastic forward passes per instance for uncertainty scores.
    pub posterior_samples: usize,
    /// Focal loss exponent.
    pub gamma: f64,
    /// Effective-number overlap discount.
    pub beta: f64,
    /// CSV to ingest instead of synthesizing `dataset`. The `[dataset]` seed
    /// still drives the split, and its reserve sizes still apply.
    pub dataset_csv: Option<PathBuf>,
    pub dataset: BenchmarkSpec,
    pub classifier: ClassifierConfig,
    pub ssl: ContrastiveConfig,
    pub curriculum: CurriculumLimits,
    pub groups: GroupThresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::Flexible,
            trials: 5,
            seed: 0,
            scaling: 0.1,
            pretrain: PretrainKind::Ssl,
            selection: SelectionMode::Anchor,
            querying: QueryStrategy::MutualInformation,
            warmup_epochs: 30,
            posterior_samples: 10,
            gamma: 2.0,
            beta: 0.999,
            dataset_csv: None,
            dataset: BenchmarkSpec::default(),
            classifier: ClassifierConfig::default(),
            ssl: ContrastiveConfig::default(),
            curriculum: CurriculumLimits::default(),
            groups: GroupThresholds::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Self = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.scaling.is_finite() && self.scaling > 0.0 && self.scaling <= 1.0) {
            return Err(Error::Config(format!(
                "scaling must be in (0, 1], got {}",
                self.scaling
            )));
        }
        if self.posterior_samples < 2 {
            return Err(Error::Config(format!(
                "posterior_samples must be at least 2, got {}",
                self.posterior_samples
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::Config(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if !(self.beta.is_finite() && (0.0..1.0).contains(&self.beta)) {
            return Err(Error::Config(format!(
                "beta must be in [0, 1), got {}",
                self.beta
            )));
        }
        if self.method == Method::Flexible
            && (self.ssl.hidden_dim != self.classifier.hidden_dim
                || self.ssl.embedding_dim != self.classifier.embedding_dim)
        {
            // the classifier inherits the pretrained encoder layer for layer
            return Err(Error::Config(format!(
                "encoder dims ({}, {}) must match classifier dims ({}, {}) for layer transfer",
                self.ssl.hidden_dim,
                self.ssl.embedding_dim,
                self.classifier.hidden_dim,
                self.classifier.embedding_dim
            )));
        }
        self.classifier.validate()?;
        self.ssl.validate()?;
        self.curriculum.validate()?;
        self.groups.validate()
    }
}
