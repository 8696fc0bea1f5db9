//! HTTP client for the remote inference protocol.

use std::time::Duration;

use super::wire::{self, GenerateRequest, MaskProbsRequest};
use super::{Backend, BackendError};

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    base_url: String,
    auth_token: Option<String>,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(base_url: impl Into<String>, auth_token: Option<String>) -> Self {
        Self::with_timeout(base_url, auth_token, Duration::from_secs(120))
    }

    pub fn with_timeout(base_url: impl Into<String>, auth_token: Option<String>, timeout: Duration) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_owned(),
            auth_token,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    fn post(&self, path: &str, body: String) -> Result<String, BackendError> {
        let url = format!("{}{path}", self.base_url);
        let mut req = self.agent.post(&url).set("Content-Type", "application/json");
        if let Some(token) = &self.auth_token {
            req = req.set("Authorization", &format!("Bearer {token}"));
        }
        match req.send_string(&body) {
            Ok(resp) => resp
                .into_string()
                .map_err(|e| BackendError::Transport(format!("{url}: reading body: {e}"))),
            Err(ureq::Error::Status(code, _)) => Err(BackendError::Transport(format!("{url}: HTTP {code}"))),
            Err(ureq::Error::Transport(t)) => Err(BackendError::Transport(format!("{url}: {t}"))),
        }
    }
}

impl Backend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn mask_probs(&self, prompt: &str, candidates: &[&str]) -> Result<Vec<f64>, BackendError> {
        let req = MaskProbsRequest {
            prompt: prompt.to_owned(),
            candidates: candidates.iter().map(|c| (*c).to_owned()).collect(),
        };
        let body = self.post(wire::MASK_PROBS_PATH, serde_json::to_string(&req).expect("request serializes"))?;
        wire::parse_mask_probs(&body, candidates.len())
    }

    fn generate(&self, prompt: &str, max_tokens: u32) -> Result<String, BackendError> {
        let req = GenerateRequest { prompt: prompt.to_owned(), max_tokens };
        let body = self.post(wire::GENERATE_PATH, serde_json::to_string(&req).expect("request serializes"))?;
        wire::parse_generate(&body)
    }
}
