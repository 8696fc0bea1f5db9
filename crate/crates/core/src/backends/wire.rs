//! JSON messages of the remote inference protocol.
//!
//! `POST /v1/mask-probs` scores the candidate words at the mask position;
//! `POST /v1/generate` continues a prompt.

use serde::{Deserialize, Serialize};

use super::BackendError;

pub const MASK_PROBS_PATH: &str = "/v1/mask-probs";
pub const GENERATE_PATH: &str = "/v1/generate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskProbsRequest {
    pub prompt: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskProbsResponse {
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub prompt: String,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub text: String,
}

/// Parses and validates a mask-probs response for `expected` candidates.
pub fn parse_mask_probs(body: &str, expected: usize) -> Result<Vec<f64>, BackendError> {
    let resp: MaskProbsResponse =
        serde_json::from_str(body).map_err(|e| BackendError::Protocol(format!("mask-probs response: {e}")))?;
    if resp.probs.len() != expected {
        return Err(BackendError::Protocol(format!(
            "mask-probs response has {} probabilities for {expected} candidates",
            resp.probs.len()
        )));
    }
    if let Some(bad) = resp.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(BackendError::Protocol(format!("probability {bad} outside [0, 1]")));
    }
    Ok(resp.probs)
}

pub fn parse_generate(body: &str) -> Result<String, BackendError> {
    let resp: GenerateResponse =
        serde_json::from_str(body).map_err(|e| BackendError::Protocol(format!("generate response: {e}")))?;
    Ok(resp.text)
}
