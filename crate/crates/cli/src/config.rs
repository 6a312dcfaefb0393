use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;
use tara_core::builder::{BuildConfig, StateVerbLexicon, DEFAULT_MERGE_THRESHOLD};
use tara_core::eval::{Averaging, EvalOptions};
use tara_core::inference::AnswerConfig;
use tara_core::matcher::DEFAULT_THRESHOLD;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AveragingArg {
    #[default]
    Micro,
    Macro,
}

impl From<AveragingArg> for Averaging {
    fn from(a: AveragingArg) -> Self {
        match a {
            AveragingArg::Micro => Averaging::Micro,
            AveragingArg::Macro => Averaging::Macro,
        }
    }
}

/// Settings read from a `--config` TOML file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threshold: Option<f64>,
    pub merge_threshold: Option<f64>,
    pub lexicon: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub averaging: Option<AveragingArg>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Values after combining the config file, flags (or environment) and
/// defaults, in that order of priority.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub threshold: f64,
    pub merge_threshold: f64,
    pub lexicon: Option<PathBuf>,
    pub jobs: usize,
    pub format: Format,
    pub averaging: AveragingArg,
}

#[derive(Debug, Clone, Default)]
pub struct FlagValues {
    pub threshold: Option<f64>,
    pub merge_threshold: Option<f64>,
    pub lexicon: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub averaging: Option<AveragingArg>,
}

impl CliConfig {
    pub fn resolve(file: FileConfig, flags: FlagValues) -> Result<Self, CliError> {
        let cfg = CliConfig {
            threshold: file.threshold.or(flags.threshold).unwrap_or(DEFAULT_THRESHOLD),
            merge_threshold: file
                .merge_threshold
                .or(flags.merge_threshold)
                .unwrap_or(DEFAULT_MERGE_THRESHOLD),
            lexicon: file.lexicon.or(flags.lexicon),
            jobs: file.jobs.or(flags.jobs).unwrap_or(0),
            format: file.format.or(flags.format).unwrap_or_default(),
            averaging: file.averaging.or(flags.averaging).unwrap_or_default(),
        };
        for (name, v) in [("threshold", cfg.threshold), ("merge threshold", cfg.merge_threshold)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(cfg)
    }

    pub fn build_config(&self) -> Result<BuildConfig, CliError> {
        let lexicon = match &self.lexicon {
            Some(p) => StateVerbLexicon::from_file(p).map_err(tara_core::Error::from)?,
            None => StateVerbLexicon::default(),
        };
        Ok(BuildConfig {
            lexicon,
            merge_threshold: self.merge_threshold,
            ..BuildConfig::default()
        })
    }

    pub fn answer_config(&self) -> Result<AnswerConfig, CliError> {
        Ok(AnswerConfig {
            threshold: self.threshold,
            build: self.build_config()?,
        })
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            averaging: self.averaging.into(),
            jobs: self.jobs,
        }
    }
}
