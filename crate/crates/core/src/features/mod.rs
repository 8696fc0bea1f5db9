//! Per-sentence features (process, position, keyword, structure and
//! sentiment dimensions) and sentence-pair features.

mod keywords;
mod sentiment;

use std::fmt;
use std::ops::Range;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{CODE_TOKEN, IssueDocument, Sentence, SentenceSource, URL_TOKEN};

pub use keywords::{KeywordFlags, keyword_flags};
pub use sentiment::{Lexicon, SentimentAnalyzer, SentimentScores, normalize};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("sentiment lexicon not readable at {}: {source}", path.display())]
    MissingLexicon {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("sentence {0} does not belong to the issue")]
    UnknownSentence(String),
    #[error("a sentence cannot be paired with itself ({0})")]
    SameSentence(String),
    #[error("sentences come from different issues ({0} vs {1})")]
    CrossIssue(String, String),
    #[error("unknown feature dimension {0:?}")]
    UnknownDimension(String),
}

/// Number of flattened per-sentence features.
pub const SENTENCE_FEATURE_COUNT: usize = 29;

/// Flattening order of [`SentenceFeatures::to_vec`].
pub const SENTENCE_FEATURE_NAMES: [&str; SENTENCE_FEATURE_COUNT] = [
    "process.is_des",
    "process.is_creator",
    "process.author_comments_count",
    "process.comments_count",
    "process.sentences_count",
    "position.comment_index_rel",
    "position.sentence_index_rel",
    "position.global_index",
    "keyword.what",
    "keyword.why",
    "keyword.when",
    "keyword.who",
    "keyword.which",
    "keyword.how",
    "keyword.modal_should_shall",
    "keyword.modal_can_could",
    "keyword.modal_may_might",
    "keyword.qmark",
    "keyword.bang",
    "keyword.greeting",
    "keyword.causal",
    "keyword.transitional",
    "structure.has_code",
    "structure.has_url",
    "structure.words_count",
    "sentiment.pos",
    "sentiment.neu",
    "sentiment.neg",
    "sentiment.compound",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureDimension {
    Process,
    Position,
    Keyword,
    Structure,
    Sentiment,
}

impl FeatureDimension {
    pub const ALL: [FeatureDimension; 5] = [
        FeatureDimension::Process,
        FeatureDimension::Position,
        FeatureDimension::Keyword,
        FeatureDimension::Structure,
        FeatureDimension::Sentiment,
    ];

    /// Slots of this dimension within the 29-entry flattening.
    pub fn slots(self) -> Range<usize> {
        match self {
            FeatureDimension::Process => 0..5,
            FeatureDimension::Position => 5..8,
            FeatureDimension::Keyword => 8..22,
            FeatureDimension::Structure => 22..25,
            FeatureDimension::Sentiment => 25..29,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureDimension::Process => "process",
            FeatureDimension::Position => "position",
            FeatureDimension::Keyword => "keyword",
            FeatureDimension::Structure => "structure",
            FeatureDimension::Sentiment => "sentiment",
        }
    }
}

impl fmt::Display for FeatureDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureDimension {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| FeatureError::UnknownDimension(s.to_owned()))
    }
}

/// A set of dimensions whose slots are zeroed before classification.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<FeatureDimension>", into = "Vec<FeatureDimension>")]
pub struct FeatureMask([bool; 5]);

impl FeatureMask {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn only(dim: FeatureDimension) -> Self {
        Self::none().with(dim)
    }

    pub fn with(mut self, dim: FeatureDimension) -> Self {
        self.0[dim as usize] = true;
        self
    }

    pub fn is_masked(self, dim: FeatureDimension) -> bool {
        self.0[dim as usize]
    }

    pub fn is_empty(self) -> bool {
        !self.0.contains(&true)
    }

    pub fn dimensions(self) -> Vec<FeatureDimension> {
        FeatureDimension::ALL.into_iter().filter(|d| self.is_masked(*d)).collect()
    }

    /// Number of the 29 slots this mask zeroes.
    pub fn masked_slots(self) -> usize {
        self.dimensions().into_iter().map(|d| d.slots().len()).sum()
    }

    /// Zeroes the masked slots of a 29-entry feature block.
    pub fn apply(self, features: &mut [f64]) {
        assert_eq!(features.len(), SENTENCE_FEATURE_COUNT);
        for d in self.dimensions() {
            features[d.slots()].fill(0.0);
        }
    }
}

impl From<Vec<FeatureDimension>> for FeatureMask {
    fn from(dims: Vec<FeatureDimension>) -> Self {
        dims.into_iter().fold(Self::none(), Self::with)
    }
}

impl From<FeatureMask> for Vec<FeatureDimension> {
    fn from(mask: FeatureMask) -> Self {
        mask.dimensions()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceFeatures {
    pub is_des: bool,
    pub is_creator: bool,
    pub author_comments_count: usize,
    pub comments_count: usize,
    pub sentences_count: usize,
    pub comment_index_rel: f64,
    pub sentence_index_rel: f64,
    pub global_index: usize,
    pub keywords: KeywordFlags,
    pub has_code: bool,
    pub has_url: bool,
    pub words_count: usize,
    pub sentiment: SentimentScores,
}

fn flag(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

impl SentenceFeatures {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(SENTENCE_FEATURE_COUNT);
        v.extend([
            flag(self.is_des),
            flag(self.is_creator),
            self.author_comments_count as f64,
            self.comments_count as f64,
            self.sentences_count as f64,
            self.comment_index_rel,
            self.sentence_index_rel,
            self.global_index as f64,
        ]);
        v.extend(self.keywords.to_array().map(flag));
        v.extend([
            flag(self.has_code),
            flag(self.has_url),
            self.words_count as f64,
            self.sentiment.pos,
            self.sentiment.neu,
            self.sentiment.neg,
            self.sentiment.compound,
        ]);
        debug_assert_eq!(v.len(), SENTENCE_FEATURE_COUNT);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFeatures {
    pub in_same_comment: bool,
    pub distance: usize,
}

/// Computes sentence features against a shared sentiment analyzer.
#[derive(Debug, Clone, Default)]
pub struct FeatureExtractor {
    sentiment: SentimentAnalyzer,
}

impl FeatureExtractor {
    pub fn new(sentiment: SentimentAnalyzer) -> Self {
        Self { sentiment }
    }

    pub fn sentiment(&self) -> &SentimentAnalyzer {
        &self.sentiment
    }

    pub fn sentence_features(&self, doc: &IssueDocument, s: &Sentence) -> Result<SentenceFeatures, FeatureError> {
        if s.issue_key != doc.key() || doc.sentence(&s.id) != Some(s) {
            return Err(FeatureError::UnknownSentence(s.id.clone()));
        }
        let comments_count = doc.log.comments.len();
        let comment_index_rel = match s.source {
            SentenceSource::Comment(k) if comments_count > 0 => (k + 1) as f64 / comments_count as f64,
            _ => 0.0,
        };
        let block = doc.block_len(s.source).max(1);
        Ok(SentenceFeatures {
            is_des: s.source == SentenceSource::Description,
            is_creator: s.author == doc.log.reporter,
            author_comments_count: doc.comments_by(&s.author),
            comments_count,
            sentences_count: doc.sentences.len(),
            comment_index_rel,
            sentence_index_rel: (s.sentence_index_in_source + 1) as f64 / block as f64,
            global_index: s.global_index,
            keywords: keyword_flags(&s.text),
            has_code: s.text.contains(CODE_TOKEN),
            has_url: s.text.contains(URL_TOKEN),
            words_count: s.text.split_whitespace().count(),
            sentiment: self.sentiment.scores(&s.text),
        })
    }

    pub fn sentence_features_by_id(&self, doc: &IssueDocument, id: &str) -> Result<SentenceFeatures, FeatureError> {
        let s = doc.sentence(id).ok_or_else(|| FeatureError::UnknownSentence(id.to_owned()))?;
        self.sentence_features(doc, s)
    }
}

pub fn extract_pair_features(s1: &Sentence, s2: &Sentence) -> Result<PairFeatures, FeatureError> {
    if s1.issue_key != s2.issue_key {
        return Err(FeatureError::CrossIssue(s1.issue_key.clone(), s2.issue_key.clone()));
    }
    if s1.id == s2.id {
        return Err(FeatureError::SameSentence(s1.id.clone()));
    }
    let in_same_comment = matches!(
        (s1.source, s2.source),
        (SentenceSource::Comment(a), SentenceSource::Comment(b)) if a == b
    );
    Ok(PairFeatures {
        in_same_comment,
        distance: s1.global_index.abs_diff(s2.global_index),
    })
}
