//! Classifier backends: the mask-scoring / generation contract, the remote
//! wire protocol, a scripted replay backend, and locally trained heads.

mod baseline;
mod classify;
mod head;
mod remote;
mod scripted;
mod tfidf;
pub mod wire;

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureError, SENTENCE_FEATURE_COUNT, SENTENCE_FEATURE_NAMES, SentenceFeatures};
use crate::prompts::{DseaPrompt, PromptError};

pub use baseline::{
    DseaBaseline, DspaBaseline, PAIR_FEATURE_COUNT, PAIR_FEATURE_NAMES, PairExample, SentenceExample,
    pair_vector, train_dsea_baseline, train_dspa_baseline,
};
pub use classify::{DESIGN_THRESHOLD, DEFAULT_MAX_NEW_TOKENS, PairClassifier, PairDecision, SentenceClassifier, SentenceDecision};
pub use head::{HeadKind, HeadModel, Sample, Scaler, TrainParams, TrainedHead, fingerprint, sigmoid, train_head};
pub use remote::RemoteBackend;
pub use scripted::{Script, ScriptedBackend, prompt_hash};
pub use tfidf::{TfidfVectorizer, tokenize};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend {backend} cannot {capability}")]
    CapabilityUnsupported { backend: String, capability: &'static str },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("no relation label in generated text {0:?}")]
    UnparsableResponse(String),
    #[error("no scripted response for prompt hash {0}")]
    ScriptMiss(String),
    #[error("model missing: {0}")]
    ModelMissing(String),
    #[error("malformed model: {0}")]
    ModelFormat(String),
    #[error("feature fingerprint mismatch: expected {expected}, model has {found}")]
    FingerprintMismatch { expected: String, found: String },
    #[error("degenerate training data: {0}")]
    DegenerateData(String),
    #[error("input has {found} features, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

/// A model server. Both capabilities are optional.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    /// Probability of each candidate filling the prompt's `[MASK]`, aligned
    /// with `candidates`.
    fn mask_probs(&self, _prompt: &str, _candidates: &[&str]) -> Result<Vec<f64>, BackendError> {
        Err(BackendError::CapabilityUnsupported { backend: self.name().to_owned(), capability: "score masks" })
    }

    fn generate(&self, _prompt: &str, _max_tokens: u32) -> Result<String, BackendError> {
        Err(BackendError::CapabilityUnsupported { backend: self.name().to_owned(), capability: "generate text" })
    }
}

/// The offline backend used with baseline models. It has no capabilities.
#[derive(Debug, Clone, Copy, Default)]
pub struct NativeBackend;

impl Backend for NativeBackend {
    fn name(&self) -> &str {
        "native"
    }
}

pub const POLARITY_COUNT: usize = 14;

/// Mask candidates: seven positive adverbs, then seven negations.
pub const POLARITY_WORDS: [&str; POLARITY_COUNT] = [
    "surely",
    "directly",
    "closely",
    "certainly",
    "strongly",
    "highly",
    "absolutely",
    "not",
    "un",
    "never",
    "no",
    "little",
    "hardly",
    "rarely",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarityVector(pub [f64; POLARITY_COUNT]);

impl PolarityVector {
    pub fn new(probs: &[f64]) -> Result<Self, BackendError> {
        let arr: [f64; POLARITY_COUNT] = probs.try_into().map_err(|_| {
            BackendError::Protocol(format!("expected {POLARITY_COUNT} polarity probabilities, got {}", probs.len()))
        })?;
        if let Some(bad) = arr.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(BackendError::Protocol(format!("polarity probability {bad} outside [0, 1]")));
        }
        Ok(Self(arr))
    }

    pub fn zeros() -> Self {
        Self([0.0; POLARITY_COUNT])
    }
}

/// Asks `backend` for the 14 polarity probabilities at the prompt's mask.
pub fn mask_probabilities(backend: &dyn Backend, prompt: &DseaPrompt) -> Result<PolarityVector, BackendError> {
    let probs = backend.mask_probs(&prompt.text, &POLARITY_WORDS)?;
    PolarityVector::new(&probs)
}

pub const SP_VECTOR_LEN: usize = POLARITY_COUNT + SENTENCE_FEATURE_COUNT;

/// Polarity vector followed by the sentence features.
#[derive(Debug, Clone, PartialEq)]
pub struct SpVector(Vec<f64>);

impl SpVector {
    pub fn new(polarity: &PolarityVector, features: &SentenceFeatures) -> Self {
        Self::from_parts(polarity, &features.to_vec())
    }

    pub fn from_parts(polarity: &PolarityVector, features: &[f64]) -> Self {
        assert_eq!(features.len(), SENTENCE_FEATURE_COUNT, "sentence feature block must have 29 entries");
        let mut v = Vec::with_capacity(SP_VECTOR_LEN);
        v.extend_from_slice(&polarity.0);
        v.extend_from_slice(features);
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Names of the 43 head inputs, in vector order.
pub fn sp_feature_names() -> Vec<String> {
    POLARITY_WORDS
        .iter()
        .map(|w| format!("polarity.{w}"))
        .chain(SENTENCE_FEATURE_NAMES.iter().map(|n| (*n).to_owned()))
        .collect()
}

pub fn sp_fingerprint() -> String {
    static FP: LazyLock<String> = LazyLock::new(|| fingerprint(&sp_feature_names()));
    FP.clone()
}

/// Relation class without direction. The discriminant is the softmax row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Supporting = 0,
    Complementary = 1,
    Unrelated = 2,
}

impl RelationKind {
    pub const ALL: [RelationKind; 3] = [RelationKind::Supporting, RelationKind::Complementary, RelationKind::Unrelated];
    /// Preference on exact score ties, strongest first.
    pub const TIE_ORDER: [RelationKind; 3] =
        [RelationKind::Unrelated, RelationKind::Complementary, RelationKind::Supporting];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Supporting => "supporting",
            RelationKind::Complementary => "complementary",
            RelationKind::Unrelated => "unrelated",
        }
    }

    /// Highest-scoring class, ties broken by [`Self::TIE_ORDER`].
    pub fn argmax(scores: &[f64; 3]) -> Self {
        let mut best = Self::TIE_ORDER[0];
        for kind in &Self::TIE_ORDER[1..] {
            if scores[kind.index()] > scores[best.index()] {
                best = *kind;
            }
        }
        best
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationKind {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "supporting" => Ok(Self::Supporting),
            "complementary" => Ok(Self::Complementary),
            "unrelated" => Ok(Self::Unrelated),
            _ => Err(BackendError::UnparsableResponse(s.to_owned())),
        }
    }
}

/// A pair decision. Supporting records which sentence is the argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "snake_case")]
pub enum RelationLabel {
    Supporting { argument: String, solution: String },
    Complementary,
    Unrelated,
}

impl RelationLabel {
    pub fn kind(&self) -> RelationKind {
        match self {
            RelationLabel::Supporting { .. } => RelationKind::Supporting,
            RelationLabel::Complementary => RelationKind::Complementary,
            RelationLabel::Unrelated => RelationKind::Unrelated,
        }
    }

    /// Attaches direction: the first sentence of the prompt is the argument.
    pub fn from_kind(kind: RelationKind, first: &str, second: &str) -> Self {
        match kind {
            RelationKind::Supporting => RelationLabel::Supporting { argument: first.to_owned(), solution: second.to_owned() },
            RelationKind::Complementary => RelationLabel::Complementary,
            RelationKind::Unrelated => RelationLabel::Unrelated,
        }
    }
}

static LABEL_WORD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(supporting|complementary|unrelated)\b").expect("valid regex"));

/// First label word in a generation, case-insensitive.
pub fn parse_relation(text: &str) -> Result<RelationKind, BackendError> {
    LABEL_WORD
        .find(text)
        .map(|m| m.as_str().parse().expect("regex only matches label words"))
        .ok_or_else(|| BackendError::UnparsableResponse(text.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_label_word_wins() {
        assert_eq!(parse_relation("supporting").unwrap(), RelationKind::Supporting);
        assert_eq!(parse_relation("I think they are unrelated here").unwrap(), RelationKind::Unrelated);
        assert_eq!(parse_relation("COMPLEMENTARY, not supporting").unwrap(), RelationKind::Complementary);
        assert!(matches!(parse_relation("unsupporting words"), Err(BackendError::UnparsableResponse(_))));
        assert!(parse_relation("").is_err());
    }

    #[test]
    fn tie_order_prefers_unrelated() {
        assert_eq!(RelationKind::argmax(&[0.0; 3]), RelationKind::Unrelated);
        assert_eq!(RelationKind::argmax(&[0.4, 0.4, 0.2]), RelationKind::Complementary);
        assert_eq!(RelationKind::argmax(&[0.5, 0.3, 0.2]), RelationKind::Supporting);
    }

    #[test]
    fn native_backend_cannot_score() {
        let prompt = DseaPrompt { text: "x is [MASK] related to the issue: y".into(), sentence_tokens_used: 1, summary_tokens_used: 1 };
        assert!(matches!(
            mask_probabilities(&NativeBackend, &prompt),
            Err(BackendError::CapabilityUnsupported { .. })
        ));
    }

    #[test]
    fn sp_names_and_fingerprint() {
        let names = sp_feature_names();
        assert_eq!(names.len(), SP_VECTOR_LEN);
        assert_eq!(names[0], "polarity.surely");
        assert_eq!(sp_fingerprint(), "e278b2da47b6bb9af940e3e17dc941252aec335cd0d5bbb3c15a0724d473c9c6");
    }

    #[test]
    fn polarity_vector_checks_arity_and_range() {
        assert!(PolarityVector::new(&[0.5; 13]).is_err());
        assert!(PolarityVector::new(&[1.5; 14]).is_err());
        assert!(PolarityVector::new(&[0.5; 14]).is_ok());
    }
}
