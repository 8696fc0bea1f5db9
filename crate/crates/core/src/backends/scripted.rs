//! Replays canned responses keyed by the SHA-256 of the prompt text.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Backend, BackendError};

/// Lowercase hex SHA-256 of `prompt`.
pub fn prompt_hash(prompt: &str) -> String {
    Sha256::digest(prompt.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default)]
    pub mask_probs: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub generate: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_text: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    script: Script,
}

impl ScriptedBackend {
    pub fn new(script: Script) -> Self {
        Self { script }
    }

    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::ModelMissing(format!("script {}: {e}", path.display())))?;
        let script = serde_json::from_str(&text)
            .map_err(|e| BackendError::ModelFormat(format!("script {}: {e}", path.display())))?;
        Ok(Self::new(script))
    }

    pub fn script(&self) -> &Script {
        &self.script
    }
}

impl Backend for ScriptedBackend {
    fn name(&self) -> &str {
        "scripted"
    }

    fn mask_probs(&self, prompt: &str, candidates: &[&str]) -> Result<Vec<f64>, BackendError> {
        let hash = prompt_hash(prompt);
        let probs = self
            .script
            .mask_probs
            .get(&hash)
            .or(self.script.default_probs.as_ref())
            .ok_or(BackendError::ScriptMiss(hash))?;
        if probs.len() != candidates.len() {
            return Err(BackendError::Protocol(format!(
                "scripted response has {} probabilities for {} candidates",
                probs.len(),
                candidates.len()
            )));
        }
        Ok(probs.clone())
    }

    fn generate(&self, prompt: &str, _max_tokens: u32) -> Result<String, BackendError> {
        let hash = prompt_hash(prompt);
        self.script
            .generate
            .get(&hash)
            .or(self.script.default_text.as_ref())
            .cloned()
            .ok_or(BackendError::ScriptMiss(hash))
    }
}
