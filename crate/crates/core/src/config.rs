//! Run configuration and the strategy matrix.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus_io::ContentMode;
use crate::profiling::{DocFreqMode, ProfileMethod};
use crate::temporal::{DecayConstants, DecayKind};
use crate::topic_model::LdaParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Toml {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid date `{0}` (expected YYYY-MM-DD)")]
    Date(String),
    #[error("unknown strategy `{id}`; valid ids are: {}", valid.join(", "))]
    UnknownStrategy { id: String, valid: Vec<String> },
    #[error("{0}")]
    Invalid(String),
}

/// One cell of the profiling x decay x content matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyConfig {
    pub profiling: ProfileMethod,
    pub decay: DecayKind,
    pub content: ContentMode,
}

impl StrategyConfig {
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for StrategyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.profiling, self.decay, self.content)
    }
}

impl FromStr for StrategyConfig {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        all_strategies()
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| ConfigError::UnknownStrategy {
                id: s.to_string(),
                valid: all_strategies().iter().map(StrategyConfig::id).collect(),
            })
    }
}

/// All twelve strategies in canonical order: profiling method, then decay,
/// then content mode.
pub fn all_strategies() -> Vec<StrategyConfig> {
    let mut out = Vec::with_capacity(12);
    for profiling in ProfileMethod::ALL {
        for decay in DecayKind::ALL {
            for content in ContentMode::ALL {
                out.push(StrategyConfig {
                    profiling,
                    decay,
                    content,
                });
            }
        }
    }
    out
}

/// The strategies named in `filter` (all when `None`), in canonical order.
pub fn enumerate_strategies<S: AsRef<str>>(filter: Option<&[S]>) -> Result<Vec<StrategyConfig>, ConfigError> {
    let Some(filter) = filter else {
        return Ok(all_strategies());
    };
    let wanted = filter
        .iter()
        .map(|id| id.as_ref().trim().parse())
        .collect::<Result<Vec<StrategyConfig>, _>>()?;
    Ok(all_strategies().into_iter().filter(|s| wanted.contains(s)).collect())
}

/// Input file locations, relative to the config file unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub taxonomy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synonyms: Option<String>,
    pub corpus: String,
    pub tweets: String,
    pub background: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suffix_rules: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lda_model_all: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lda_model_title: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSettings {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub inference_iterations: usize,
    pub min_df: usize,
}

impl Default for LdaSettings {
    fn default() -> Self {
        Self {
            topics: 100,
            alpha: 0.5,
            beta: 0.1,
            iterations: 500,
            inference_iterations: 200,
            min_df: 25,
        }
    }
}

impl LdaSettings {
    pub fn params(&self, seed: u64) -> LdaParams {
        LdaParams {
            topics: self.topics,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            seed,
        }
    }
}

fn default_seed() -> u64 {
    1
}

fn default_k() -> usize {
    5
}

fn default_background_factor() -> f64 {
    5.0
}

fn default_theta() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Reference date, `YYYY-MM-DD`.
    pub now: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_background_factor")]
    pub background_factor: f64,
    #[serde(default)]
    pub doc_freq_mode: DocFreqMode,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<String>>,
    pub paths: InputPaths,
    #[serde(default)]
    pub decay: DecayConstants,
    #[serde(default)]
    pub lda: LdaSettings,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn new(paths: InputPaths, now: NaiveDate) -> Self {
        Self {
            now: now.format("%Y-%m-%d").to_string(),
            seed: default_seed(),
            k: default_k(),
            background_factor: default_background_factor(),
            doc_freq_mode: DocFreqMode::default(),
            theta: default_theta(),
            strategies: None,
            paths,
            decay: DecayConstants::default(),
            lda: LdaSettings::default(),
            base_dir: PathBuf::new(),
        }
    }

    /// Parses TOML; relative paths will resolve against `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, ConfigError> {
        let mut config: RunConfig = toml::from_str(text).map_err(|source| ConfigError::Toml {
            path: "<string>".into(),
            source,
        })?;
        config.base_dir = base_dir.into();
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config: RunConfig = toml::from_str(&text).map_err(|source| ConfigError::Toml {
            path: path.display().to_string(),
            source,
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn now_date(&self) -> Result<NaiveDate, ConfigError> {
        NaiveDate::parse_from_str(&self.now, "%Y-%m-%d").map_err(|_| ConfigError::Date(self.now.clone()))
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn lda_model_path(&self, mode: ContentMode) -> Option<PathBuf> {
        let path = match mode {
            ContentMode::All => self.paths.lda_model_all.as_deref(),
            ContentMode::Title => self.paths.lda_model_title.as_deref(),
        };
        path.map(|p| self.resolve(p))
    }

    pub fn strategies(&self) -> Result<Vec<StrategyConfig>, ConfigError> {
        enumerate_strategies(self.strategies.as_deref())
    }

    /// Checks parameters (not files).
    pub fn check(&self) -> Result<(), ConfigError> {
        self.now_date()?;
        if self.k == 0 {
            return Err(ConfigError::Invalid("k must be at least 1".into()));
        }
        if !(self.background_factor.is_finite() && self.background_factor >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "background_factor must be a non-negative number, got {}",
                self.background_factor
            )));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(ConfigError::Invalid(format!("theta must be positive, got {}", self.theta)));
        }
        self.decay.validate().map_err(ConfigError::Invalid)?;
        let lda = &self.lda;
        if lda.topics == 0 {
            return Err(ConfigError::Invalid("lda.topics must be at least 1".into()));
        }
        if !(lda.alpha > 0.0 && lda.beta > 0.0) {
            return Err(ConfigError::Invalid("lda.alpha and lda.beta must be positive".into()));
        }
        self.strategies()?;
        Ok(())
    }

    /// `(name, configured path, resolved path)` of every input file the
    /// config names.
    pub fn input_files(&self) -> Vec<(&'static str, String, PathBuf)> {
        let p = &self.paths;
        let named = [
            ("taxonomy", Some(&p.taxonomy)),
            ("synonyms", p.synonyms.as_ref()),
            ("corpus", Some(&p.corpus)),
            ("tweets", Some(&p.tweets)),
            ("background", Some(&p.background)),
            ("stopwords", p.stopwords.as_ref()),
            ("suffix_rules", p.suffix_rules.as_ref()),
            ("lda_model_all", p.lda_model_all.as_ref()),
            ("lda_model_title", p.lda_model_title.as_ref()),
        ];
        named
            .into_iter()
            .filter_map(|(name, path)| path.map(|path| (name, path.clone(), self.resolve(path))))
            .collect()
    }
}
