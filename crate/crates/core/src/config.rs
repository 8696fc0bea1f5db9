//! Run configuration shared by the CLI commands.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{
    Backend, BackendError, DseaBaseline, DspaBaseline, HeadModel, NativeBackend, PairClassifier, RemoteBackend,
    ScriptedBackend, SentenceClassifier,
};
use crate::corpus::CleanConfig;
use crate::features::{FeatureExtractor, SentimentAnalyzer};
use crate::miner::Miner;
use crate::prompts::{DSEA_DEFAULT_MAX, DSPA_DEFAULT_MAX, TokenBudget};

/// Environment variable that overrides `backend.auth_token`.
pub const TOKEN_ENV: &str = "RATIONALE_MINER_TOKEN";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("missing required field {field}: {reason}")]
    Missing { field: &'static str, reason: String },
    #[error("invalid value for {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("cannot read config {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Mode {
    /// Backend mask probabilities and generation, with a local 43-input head.
    PromptHead,
    /// Local TF-IDF and pair-feature baselines; no backend needed.
    #[default]
    Baseline,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Remote,
    Scripted,
    Native,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: Option<String>,
    pub auth_token: Option<String>,
    /// Prompt-hash script for the scripted backend.
    pub script: Option<PathBuf>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelPaths {
    pub dsea_head: Option<PathBuf>,
    pub dsea_baseline: Option<PathBuf>,
    pub dspa_baseline: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub dsea_max: usize,
    pub dspa_max: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { dsea_max: DSEA_DEFAULT_MAX, dspa_max: DSPA_DEFAULT_MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_dir: Option<PathBuf>,
    pub mode: Mode,
    pub backend: Option<BackendConfig>,
    pub models: ModelPaths,
    pub budgets: Budgets,
    pub lexicon: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 means one per processor.
    pub workers: usize,
    pub clean: CleanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus_dir: None,
            mode: Mode::default(),
            backend: None,
            models: ModelPaths::default(),
            budgets: Budgets::default(),
            lexicon: None,
            annotations: None,
            seed: 0,
            output_dir: PathBuf::from("out"),
            workers: 0,
            clean: CleanConfig::default(),
        }
    }
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p
        && path.is_relative()
    {
        *path = base.join(&*path);
    }
}

impl RunConfig {
    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.to_owned(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.corpus_dir);
        resolve(base, &mut cfg.lexicon);
        resolve(base, &mut cfg.annotations);
        resolve(base, &mut cfg.models.dsea_head);
        resolve(base, &mut cfg.models.dsea_baseline);
        resolve(base, &mut cfg.models.dspa_baseline);
        if let Some(b) = &mut cfg.backend {
            resolve(base, &mut b.script);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Replaces the backend token with the environment override, if set.
    pub fn apply_env(&mut self) {
        if let Ok(token) = std::env::var(TOKEN_ENV)
            && !token.is_empty()
        {
            self.backend.get_or_insert_with(BackendConfig::default).auth_token = Some(token);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [("budgets.dsea_max", self.budgets.dsea_max), ("budgets.dspa_max", self.budgets.dspa_max)] {
            if v <= 16 {
                return Err(ConfigError::Invalid { field, reason: format!("must exceed 16, got {v}") });
            }
        }
        if self.mode == Mode::PromptHead {
            let backend = self.backend.as_ref().ok_or_else(|| ConfigError::Missing {
                field: "backend",
                reason: "prompt_head mode needs a backend".into(),
            })?;
            match backend.kind {
                BackendKind::Remote if backend.base_url.as_deref().is_none_or(str::is_empty) => {
                    return Err(ConfigError::Missing {
                        field: "backend.base_url",
                        reason: "prompt_head mode with a remote backend needs its URL".into(),
                    });
                }
                BackendKind::Scripted if backend.script.is_none() => {
                    return Err(ConfigError::Missing { field: "backend.script", reason: "scripted backend needs a script file".into() });
                }
                BackendKind::Native => {
                    return Err(ConfigError::Invalid {
                        field: "backend.kind",
                        reason: "the native backend cannot score masks; use baseline mode".into(),
                    });
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn dsea_budget(&self) -> Result<TokenBudget, ConfigError> {
        TokenBudget::new(self.budgets.dsea_max)
            .map_err(|e| ConfigError::Invalid { field: "budgets.dsea_max", reason: e.to_string() })
    }

    pub fn dspa_budget(&self) -> Result<TokenBudget, ConfigError> {
        TokenBudget::new(self.budgets.dspa_max)
            .map_err(|e| ConfigError::Invalid { field: "budgets.dspa_max", reason: e.to_string() })
    }

    pub fn corpus_dir(&self) -> Result<&Path, ConfigError> {
        self.corpus_dir.as_deref().ok_or_else(|| ConfigError::Missing { field: "corpus_dir", reason: "no corpus directory given".into() })
    }

    pub fn annotations(&self) -> Result<&Path, ConfigError> {
        self.annotations.as_deref().ok_or_else(|| ConfigError::Missing { field: "annotations", reason: "no annotation file given".into() })
    }

    pub fn build_backend(&self) -> Result<Arc<dyn Backend>, BackendError> {
        let Some(b) = &self.backend else { return Ok(Arc::new(NativeBackend)) };
        Ok(match b.kind {
            BackendKind::Native => Arc::new(NativeBackend),
            BackendKind::Scripted => {
                let path = b.script.as_deref().ok_or_else(|| BackendError::ModelMissing("backend.script".into()))?;
                Arc::new(ScriptedBackend::from_path(path)?)
            }
            BackendKind::Remote => {
                let url = b.base_url.clone().ok_or_else(|| BackendError::ModelMissing("backend.base_url".into()))?;
                match b.timeout_secs {
                    Some(secs) => Arc::new(RemoteBackend::with_timeout(url, b.auth_token.clone(), std::time::Duration::from_secs(secs))),
                    None => Arc::new(RemoteBackend::new(url, b.auth_token.clone())),
                }
            }
        })
    }

    pub fn extractor(&self) -> Result<FeatureExtractor, BackendError> {
        Ok(match &self.lexicon {
            Some(path) => FeatureExtractor::new(SentimentAnalyzer::from_path(path)?),
            None => FeatureExtractor::default(),
        })
    }

    fn model_path<'a>(path: &'a Option<PathBuf>, field: &str) -> Result<&'a Path, BackendError> {
        path.as_deref().ok_or_else(|| BackendError::ModelMissing(format!("{field} is not configured")))
    }

    /// Sentence and pair classifiers for the configured mode. In baseline
    /// mode a missing pairing model means every pair is unrelated.
    pub fn classifiers(&self) -> Result<(SentenceClassifier, PairClassifier), Box<dyn std::error::Error + Send + Sync>> {
        match self.mode {
            Mode::PromptHead => {
                let backend = self.build_backend()?;
                let head_path = Self::model_path(&self.models.dsea_head, "models.dsea_head")?;
                let head = HeadModel::load(head_path)?;
                let sentences = SentenceClassifier::prompt_head(backend.clone(), head, self.dsea_budget()?)?;
                Ok((sentences, PairClassifier::remote(backend, self.dspa_budget()?)))
            }
            Mode::Baseline => {
                let dsea = DseaBaseline::load(Self::model_path(&self.models.dsea_baseline, "models.dsea_baseline")?)?;
                let dspa = match &self.models.dspa_baseline {
                    Some(p) => DspaBaseline::load(p)?,
                    None => {
                        log::warn!("models.dspa_baseline not configured; all pairs will be unrelated");
                        DspaBaseline::zeros()
                    }
                };
                Ok((SentenceClassifier::Baseline(dsea), PairClassifier::Baseline(dspa)))
            }
        }
    }

    pub fn miner(&self) -> Result<Miner, Box<dyn std::error::Error + Send + Sync>> {
        let (sentences, pairs) = self.classifiers()?;
        let mut miner = Miner::new(sentences, pairs);
        miner.clean = self.clean.clone();
        miner.extractor = self.extractor()?;
        Ok(miner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_head_needs_url() {
        let cfg: RunConfig = serde_json::from_str(r#"{"mode":"prompt_head","backend":{"kind":"remote"}}"#).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("backend.base_url"), "{err}");
        let cfg: RunConfig = serde_json::from_str(r#"{"mode":"prompt_head"}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg: RunConfig =
            serde_json::from_str(r#"{"mode":"prompt_head","backend":{"kind":"remote","base_url":"http://x"}}"#).unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn defaults_and_budget_checks() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg.budgets, Budgets { dsea_max: 384, dspa_max: 512 });
        assert_eq!(cfg.mode, Mode::Baseline);
        cfg.validate().unwrap();
        let cfg: RunConfig = serde_json::from_str(r#"{"budgets":{"dsea_max":10}}"#).unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("budgets.dsea_max"));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus":1}"#).is_err());
    }
}
