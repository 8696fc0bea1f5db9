//! Sentence and pair classifiers over either a backend or a local baseline.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::baseline::{DseaBaseline, DspaBaseline};
use super::head::HeadModel;
use super::{
    Backend, BackendError, RelationKind, RelationLabel, SP_VECTOR_LEN, SpVector, mask_probabilities,
    parse_relation, sp_fingerprint,
};
use crate::corpus::{IssueDocument, Sentence};
use crate::features::{FeatureExtractor, FeatureMask, extract_pair_features};
use crate::prompts::{TokenBudget, TokenCounter, WhitespaceCounter, build_dsea_prompt, build_dspa_prompt};

/// Scores at or above this are design-related.
pub const DESIGN_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceDecision {
    pub design_related: bool,
    pub score: f64,
}

impl SentenceDecision {
    pub fn from_score(score: f64) -> Self {
        Self { design_related: score >= DESIGN_THRESHOLD, score }
    }
}

pub enum SentenceClassifier {
    /// Mask probabilities from a backend, concatenated with the sentence
    /// features and fed to a 43-input logistic head.
    PromptHead {
        backend: Arc<dyn Backend>,
        head: HeadModel,
        mask: FeatureMask,
        budget: TokenBudget,
        counter: Arc<dyn TokenCounter>,
    },
    Baseline(DseaBaseline),
}

impl fmt::Debug for SentenceClassifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PromptHead { backend, budget, .. } => f
                .debug_struct("PromptHead")
                .field("backend", &backend.name())
                .field("budget", budget)
                .finish_non_exhaustive(),
            Self::Baseline(_) => f.write_str("Baseline"),
        }
    }
}

impl SentenceClassifier {
    pub fn prompt_head(backend: Arc<dyn Backend>, head: HeadModel, budget: TokenBudget) -> Result<Self, BackendError> {
        head.validate()?;
        if head.input_dim() != SP_VECTOR_LEN {
            return Err(BackendError::DimensionMismatch { expected: SP_VECTOR_LEN, found: head.input_dim() });
        }
        head.check_fingerprint(&sp_fingerprint())?;
        Ok(Self::PromptHead { backend, head, mask: FeatureMask::none(), budget, counter: Arc::new(WhitespaceCounter) })
    }

    pub fn with_counter(mut self, new: Arc<dyn TokenCounter>) -> Self {
        if let Self::PromptHead { counter, .. } = &mut self {
            *counter = new;
        }
        self
    }

    pub fn with_mask(mut self, new: FeatureMask) -> Self {
        if let Self::PromptHead { mask, .. } = &mut self {
            *mask = new;
        }
        self
    }

    /// Prompt, query and concatenate; the input of the prompt head.
    pub fn sp_vector(
        backend: &dyn Backend,
        doc: &IssueDocument,
        s: &Sentence,
        extractor: &FeatureExtractor,
        budget: TokenBudget,
        counter: &dyn TokenCounter,
        mask: FeatureMask,
    ) -> Result<SpVector, BackendError> {
        let prompt = build_dsea_prompt(&s.text, &doc.log.summary, budget, counter)?;
        let polarity = mask_probabilities(backend, &prompt)?;
        let mut features = extractor.sentence_features(doc, s)?.to_vec();
        mask.apply(&mut features);
        Ok(SpVector::from_parts(&polarity, &features))
    }

    pub fn classify(
        &self,
        doc: &IssueDocument,
        s: &Sentence,
        extractor: &FeatureExtractor,
    ) -> Result<SentenceDecision, BackendError> {
        let score = match self {
            Self::PromptHead { backend, head, mask, budget, counter } => {
                let sp = Self::sp_vector(backend.as_ref(), doc, s, extractor, *budget, counter.as_ref(), *mask)?;
                head.positive_probability(sp.as_slice())?
            }
            Self::Baseline(model) => model.score(doc, s, extractor)?,
        };
        Ok(SentenceDecision::from_score(score))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDecision {
    pub label: RelationLabel,
    /// Per-class scores indexed by [`RelationKind::index`]. One-hot for
    /// generated labels.
    pub scores: [f64; 3],
}

pub enum PairClassifier {
    Remote {
        backend: Arc<dyn Backend>,
        budget: TokenBudget,
        counter: Arc<dyn TokenCounter>,
        max_tokens: u32,
    },
    Baseline(DspaBaseline),
}

impl fmt::Debug for PairClassifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Remote { backend, budget, .. } => f
                .debug_struct("Remote")
                .field("backend", &backend.name())
                .field("budget", budget)
                .finish_non_exhaustive(),
            Self::Baseline(_) => f.write_str("Baseline"),
        }
    }
}

pub const DEFAULT_MAX_NEW_TOKENS: u32 = 16;

impl PairClassifier {
    pub fn remote(backend: Arc<dyn Backend>, budget: TokenBudget) -> Self {
        Self::Remote { backend, budget, counter: Arc::new(WhitespaceCounter), max_tokens: DEFAULT_MAX_NEW_TOKENS }
    }

    pub fn with_counter(mut self, new: Arc<dyn TokenCounter>) -> Self {
        if let Self::Remote { counter, .. } = &mut self {
            *counter = new;
        }
        self
    }

    /// Classifies the ordered pair; a Supporting result makes `s1` the
    /// argument and `s2` the solution.
    pub fn classify(&self, s1: &Sentence, s2: &Sentence) -> Result<PairDecision, BackendError> {
        let pf = extract_pair_features(s1, s2)?;
        let (kind, scores) = match self {
            Self::Remote { backend, budget, counter, max_tokens } => {
                let prompt = build_dspa_prompt(s1, s2, pf, *budget, counter.as_ref())?;
                let text = backend.generate(&prompt.generation_prompt(), *max_tokens)?;
                let kind = parse_relation(&text)?;
                let mut scores = [0.0; 3];
                scores[kind.index()] = 1.0;
                (kind, scores)
            }
            Self::Baseline(model) => {
                let scores = model.scores(&s1.text, &s2.text, pf)?;
                (RelationKind::argmax(&scores), scores)
            }
        };
        Ok(PairDecision { label: RelationLabel::from_kind(kind, &s1.id, &s2.id), scores })
    }
}

