//! Training and scoring of extractors from annotated documents, and the
//! feature-dimension ablation harness.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::EvalError;
use super::annotations::{AnnotatedSentence, SentenceLabel};
use super::metrics::{Score, eval_dsea};
use crate::backends::{
    Backend, BackendError, DseaBaseline, DspaBaseline, HeadKind, PairExample, RelationKind, Sample, SentenceClassifier,
    SentenceExample, TrainParams, sp_fingerprint, train_dsea_baseline, train_dspa_baseline, train_head,
};
use crate::corpus::IssueDocument;
use crate::features::{FeatureDimension, FeatureExtractor, FeatureMask};
use crate::par;
use crate::prompts::{TokenBudget, WhitespaceCounter};

/// A document with the annotation of each labelled sentence.
#[derive(Debug, Clone)]
pub struct LabeledDocument {
    pub doc: IssueDocument,
    pub labels: BTreeMap<String, AnnotatedSentence>,
}

/// Pairs documents with their annotations. Annotated ids missing from a
/// document are reported; unannotated sentences are left out of training.
pub fn label_documents(docs: Vec<IssueDocument>, anns: &[AnnotatedSentence]) -> Result<Vec<LabeledDocument>, EvalError> {
    let mut by_issue: BTreeMap<&str, BTreeMap<String, AnnotatedSentence>> = BTreeMap::new();
    for a in anns {
        by_issue.entry(&a.issue).or_default().insert(a.sentence_id.clone(), a.clone());
    }
    docs.into_iter()
        .filter_map(|doc| {
            let labels = by_issue.remove(doc.key())?;
            Some(match labels.keys().find(|id| doc.sentence(id).is_none()) {
                Some(id) => Err(EvalError::CoverageMismatch(format!("{}: annotated sentence {id} not in corpus", doc.key()))),
                None => Ok(LabeledDocument { doc, labels }),
            })
        })
        .collect()
}

/// Labelled sentences in document order.
pub fn sentence_examples(docs: &[LabeledDocument]) -> Vec<SentenceExample<'_>> {
    docs.iter()
        .flat_map(|d| {
            d.doc.sentences.iter().filter_map(move |s| {
                d.labels.get(&s.id).map(|a| SentenceExample { doc: &d.doc, sentence: s, related: a.label != SentenceLabel::Unrelated })
            })
        })
        .collect()
}

/// Relation of every pair of design-related sentences, argument first for
/// Supporting pairs and document order otherwise.
pub fn pair_examples(docs: &[LabeledDocument]) -> Vec<PairExample<'_>> {
    let mut out = Vec::new();
    for d in docs {
        let related: Vec<_> = d
            .doc
            .sentences
            .iter()
            .filter_map(|s| d.labels.get(&s.id).filter(|a| a.label != SentenceLabel::Unrelated).map(|a| (s, a)))
            .collect();
        for i in 0..related.len() {
            for j in i + 1..related.len() {
                let ((s1, a1), (s2, a2)) = (related[i], related[j]);
                let same_rationale = a1.rationale_id.is_some() && a1.rationale_id == a2.rationale_id;
                let (first, second, kind) = match (a1.label, a2.label) {
                    (SentenceLabel::Solution, SentenceLabel::Solution) if same_rationale => (s1, s2, RelationKind::Complementary),
                    (SentenceLabel::Argument, SentenceLabel::Argument)
                        if same_rationale && a1.argument_group_id == a2.argument_group_id =>
                    {
                        (s1, s2, RelationKind::Complementary)
                    }
                    (SentenceLabel::Argument, SentenceLabel::Solution) if same_rationale => (s1, s2, RelationKind::Supporting),
                    (SentenceLabel::Solution, SentenceLabel::Argument) if same_rationale => (s2, s1, RelationKind::Supporting),
                    _ => (s1, s2, RelationKind::Unrelated),
                };
                out.push(PairExample { first, second, kind });
            }
        }
    }
    out
}

/// How sentences are scored during training and ablation.
#[derive(Clone)]
pub enum ExtractionMode {
    Baseline,
    PromptHead { backend: Arc<dyn Backend>, budget: TokenBudget },
}

impl std::fmt::Debug for ExtractionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Baseline => f.write_str("Baseline"),
            Self::PromptHead { backend, .. } => write!(f, "PromptHead({})", backend.name()),
        }
    }
}

pub fn train_extractor(
    mode: &ExtractionMode,
    train: &[SentenceExample<'_>],
    extractor: &FeatureExtractor,
    mask: FeatureMask,
    params: TrainParams,
    seed: u64,
) -> Result<SentenceClassifier, EvalError> {
    Ok(match mode {
        ExtractionMode::Baseline => {
            SentenceClassifier::Baseline(train_dsea_baseline(train, extractor, mask, params, seed)?)
        }
        ExtractionMode::PromptHead { backend, budget } => {
            let samples = par::try_map(train, |e| -> Result<Sample, BackendError> {
                let sp = SentenceClassifier::sp_vector(backend.as_ref(), e.doc, e.sentence, extractor, *budget, &WhitespaceCounter, mask)?;
                Ok(Sample { features: sp.as_slice().to_vec(), label: usize::from(e.related) })
            })?;
            let head = train_head(&samples, HeadKind::Binary, params, seed, sp_fingerprint())?.model;
            SentenceClassifier::prompt_head(backend.clone(), head, *budget)?.with_mask(mask)
        }
    })
}

/// Extraction scores of `classifier` over `test`.
pub fn evaluate_extractor(
    classifier: &SentenceClassifier,
    test: &[SentenceExample<'_>],
    extractor: &FeatureExtractor,
) -> Result<Score, EvalError> {
    let decisions = par::try_map(test, |e| classifier.classify(e.doc, e.sentence, extractor))?;
    let key = |e: &SentenceExample<'_>| (e.doc.key().to_owned(), e.sentence.id.clone());
    let pred: BTreeSet<_> = test.iter().zip(&decisions).filter(|(_, d)| d.design_related).map(|(e, _)| key(e)).collect();
    let gold: BTreeSet<_> = test.iter().filter(|e| e.related).map(key).collect();
    Ok(eval_dsea(&pred, &gold))
}

/// Majority-class reference: predicts the class most frequent in `train`
/// for every test sentence.
pub fn majority_score(train: &[SentenceExample<'_>], test: &[SentenceExample<'_>]) -> Score {
    let positives = train.iter().filter(|e| e.related).count();
    let predict_related = positives * 2 > train.len();
    let key = |e: &SentenceExample<'_>| (e.doc.key().to_owned(), e.sentence.id.clone());
    let pred: BTreeSet<_> = if predict_related { test.iter().map(key).collect() } else { BTreeSet::new() };
    let gold: BTreeSet<_> = test.iter().filter(|e| e.related).map(key).collect();
    eval_dsea(&pred, &gold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub dimension: FeatureDimension,
    pub masked_slots: usize,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub full: Score,
    pub ablations: Vec<AblationRow>,
}

/// Retrains with the named dimension zeroed and scores on `test`.
#[allow(clippy::too_many_arguments)]
pub fn ablate(
    mode: &ExtractionMode,
    train: &[SentenceExample<'_>],
    test: &[SentenceExample<'_>],
    extractor: &FeatureExtractor,
    dimension: &str,
    params: TrainParams,
    seed: u64,
) -> Result<AblationRow, EvalError> {
    let dimension: FeatureDimension = dimension.parse()?;
    let mask = FeatureMask::only(dimension);
    let classifier = train_extractor(mode, train, extractor, mask, params, seed)?;
    Ok(AblationRow { dimension, masked_slots: mask.masked_slots(), score: evaluate_extractor(&classifier, test, extractor)? })
}

/// The unablated score followed by one row per dimension.
pub fn ablate_all(
    mode: &ExtractionMode,
    train: &[SentenceExample<'_>],
    test: &[SentenceExample<'_>],
    extractor: &FeatureExtractor,
    params: TrainParams,
    seed: u64,
) -> Result<AblationReport, EvalError> {
    let full = train_extractor(mode, train, extractor, FeatureMask::none(), params, seed)?;
    let full = evaluate_extractor(&full, test, extractor)?;
    let ablations = FeatureDimension::ALL
        .iter()
        .map(|d| ablate(mode, train, test, extractor, d.name(), params, seed))
        .collect::<Result<_, _>>()?;
    Ok(AblationReport { full, ablations })
}

impl AblationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let names: Vec<String> = std::iter::once("none".to_owned())
            .chain(self.ablations.iter().map(|r| format!("-{} ({})", r.dimension, r.masked_slots)))
            .collect();
        let scores: Vec<&Score> = std::iter::once(&self.full).chain(self.ablations.iter().map(|r| &r.score)).collect();
        let rows: Vec<(&str, &Score)> = names.iter().map(String::as_str).zip(scores).collect();
        super::metrics::score_table(&rows)
    }
}

/// Both baselines from one labelled corpus.
pub fn train_baselines(
    docs: &[LabeledDocument],
    extractor: &FeatureExtractor,
    params: TrainParams,
    seed: u64,
) -> Result<(DseaBaseline, Option<DspaBaseline>), EvalError> {
    let sentences = sentence_examples(docs);
    let dsea = train_dsea_baseline(&sentences, extractor, FeatureMask::none(), params, seed)?;
    let pairs = pair_examples(docs);
    let dspa = match train_dspa_baseline(&pairs, params, seed) {
        Ok(m) => Some(m),
        Err(BackendError::DegenerateData(reason)) => {
            log::warn!("pairing baseline not trained: {reason}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    Ok((dsea, dspa))
}
