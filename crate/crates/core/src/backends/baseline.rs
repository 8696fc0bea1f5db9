//! Offline baselines: TF-IDF ⊕ sentence features for extraction, and a
//! six-feature softmax head for pairing.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::head::{HeadKind, HeadModel, Sample, TrainParams, fingerprint, train_head};
use super::tfidf::{TfidfVectorizer, tokenize};
use super::{BackendError, RelationKind};
use crate::corpus::{IssueDocument, Sentence};
use crate::features::{FeatureExtractor, FeatureMask, PairFeatures, SENTENCE_FEATURE_NAMES, keyword_flags};
use crate::par;

/// Minimum document frequency for a vocabulary token.
pub const MIN_DF: usize = 2;

pub(crate) fn read_model<T: DeserializeOwned>(path: &Path) -> Result<T, BackendError> {
    let text = std::fs::read_to_string(path).map_err(|e| BackendError::ModelMissing(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| BackendError::ModelFormat(format!("{}: {e}", path.display())))
}

pub(crate) fn write_model<T: Serialize>(path: &Path, model: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(model).expect("models serialize");
    text.push('\n');
    std::fs::write(path, text)
}

#[derive(Debug, Clone, Copy)]
pub struct SentenceExample<'a> {
    pub doc: &'a IssueDocument,
    pub sentence: &'a Sentence,
    pub related: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DseaBaseline {
    pub vectorizer: TfidfVectorizer,
    #[serde(default)]
    pub mask: FeatureMask,
    pub head: HeadModel,
}

impl DseaBaseline {
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = self.vectorizer.feature_names();
        names.extend(SENTENCE_FEATURE_NAMES.iter().map(|n| (*n).to_owned()));
        names
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        self.head.validate()?;
        if self.vectorizer.idf.len() != self.vectorizer.vocabulary.len()
            || self.vectorizer.vocabulary.values().any(|&i| i >= self.vectorizer.idf.len())
        {
            return Err(BackendError::ModelFormat("vocabulary and idf disagree".into()));
        }
        self.head.check_fingerprint(&fingerprint(&self.feature_names()))?;
        if self.head.kind != HeadKind::Binary {
            return Err(BackendError::ModelFormat("extraction baseline needs a binary head".into()));
        }
        Ok(())
    }

    /// Head input for one sentence: tf-idf row, then the masked features.
    pub fn input(&self, text: &str, features: &[f64]) -> Vec<f64> {
        let mut features = features.to_vec();
        self.mask.apply(&mut features);
        let mut row = self.vectorizer.transform(text);
        row.extend(features);
        row
    }

    pub fn score(&self, doc: &IssueDocument, s: &Sentence, extractor: &FeatureExtractor) -> Result<f64, BackendError> {
        let features = extractor.sentence_features(doc, s)?.to_vec();
        self.head.positive_probability(&self.input(&s.text, &features))
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let model: Self = read_model(path)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        write_model(path, self)
    }
}

/// Fits the extraction baseline. The vocabulary comes from the training
/// sentences only; with an empty vocabulary the head sees features alone.
pub fn train_dsea_baseline(
    examples: &[SentenceExample<'_>],
    extractor: &FeatureExtractor,
    mask: FeatureMask,
    params: TrainParams,
    seed: u64,
) -> Result<DseaBaseline, BackendError> {
    let texts: Vec<&str> = examples.iter().map(|e| e.sentence.text.as_str()).collect();
    let vectorizer = TfidfVectorizer::fit(&texts, MIN_DF);
    let mut model = DseaBaseline {
        vectorizer,
        mask,
        head: HeadModel::zeros(HeadKind::Binary, 0, String::new()),
    };
    let samples = par::try_map(examples, |e| -> Result<Sample, BackendError> {
        let features = extractor.sentence_features(e.doc, e.sentence)?.to_vec();
        Ok(Sample { features: model.input(&e.sentence.text, &features), label: usize::from(e.related) })
    })?;
    model.head = train_head(&samples, HeadKind::Binary, params, seed, fingerprint(&model.feature_names()))?.model;
    Ok(model)
}

pub const PAIR_FEATURE_COUNT: usize = 6;

pub const PAIR_FEATURE_NAMES: [&str; PAIR_FEATURE_COUNT] = [
    "pair.in_same_comment",
    "pair.distance",
    "pair.token_jaccard",
    "pair.s1_words",
    "pair.s2_words",
    "pair.shared_keywords",
];

/// `[in_same_comment, distance, token Jaccard, |s1| words, |s2| words,
/// keyword flags set in both]`.
pub fn pair_vector(s1: &str, s2: &str, pf: PairFeatures) -> [f64; PAIR_FEATURE_COUNT] {
    let a: BTreeSet<String> = tokenize(s1).into_iter().collect();
    let b: BTreeSet<String> = tokenize(s2).into_iter().collect();
    let union = a.union(&b).count();
    let jaccard = if union == 0 { 0.0 } else { a.intersection(&b).count() as f64 / union as f64 };
    let (k1, k2) = (keyword_flags(s1).to_array(), keyword_flags(s2).to_array());
    let shared = k1.iter().zip(&k2).filter(|(x, y)| **x && **y).count();
    [
        if pf.in_same_comment { 1.0 } else { 0.0 },
        pf.distance as f64,
        jaccard,
        s1.split_whitespace().count() as f64,
        s2.split_whitespace().count() as f64,
        shared as f64,
    ]
}

#[derive(Debug, Clone)]
pub struct PairExample<'a> {
    /// The argument when `kind` is Supporting.
    pub first: &'a Sentence,
    pub second: &'a Sentence,
    pub kind: RelationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DspaBaseline {
    pub head: HeadModel,
}

impl DspaBaseline {
    /// All-zero head; every pair comes out Unrelated by the tie order.
    pub fn zeros() -> Self {
        Self { head: HeadModel::zeros(HeadKind::Softmax, PAIR_FEATURE_COUNT, fingerprint(&PAIR_FEATURE_NAMES)) }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        self.head.validate()?;
        self.head.check_fingerprint(&fingerprint(&PAIR_FEATURE_NAMES))?;
        if self.head.kind != HeadKind::Softmax || self.head.input_dim() != PAIR_FEATURE_COUNT {
            return Err(BackendError::ModelFormat("pairing baseline needs a 3-way head over 6 features".into()));
        }
        Ok(())
    }

    /// Probabilities indexed by [`RelationKind::index`].
    pub fn scores(&self, s1: &str, s2: &str, pf: PairFeatures) -> Result<[f64; 3], BackendError> {
        let p = self.head.class_probabilities(&pair_vector(s1, s2, pf))?;
        Ok([p[0], p[1], p[2]])
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let model: Self = read_model(path)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        write_model(path, self)
    }
}

pub fn train_dspa_baseline(examples: &[PairExample<'_>], params: TrainParams, seed: u64) -> Result<DspaBaseline, BackendError> {
    let samples = par::try_map(examples, |e| -> Result<Sample, BackendError> {
        let pf = crate::features::extract_pair_features(e.first, e.second)?;
        Ok(Sample { features: pair_vector(&e.first.text, &e.second.text, pf).to_vec(), label: e.kind.index() })
    })?;
    let trained = train_head(&samples, HeadKind::Softmax, params, seed, fingerprint(&PAIR_FEATURE_NAMES))?;
    Ok(DspaBaseline { head: trained.model })
}
