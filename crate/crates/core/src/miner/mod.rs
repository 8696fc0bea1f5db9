//! The three-phase pipeline: extraction, pairing, and construction.

mod construct;
mod graph;
mod output;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::backends::{BackendError, PairClassifier, PairDecision, RelationLabel, SentenceClassifier, SentenceDecision};
use crate::corpus::{CleanConfig, IssueDocument, IssueLog, Segmenter};
use crate::features::FeatureExtractor;
use crate::par;

pub use construct::{Construction, DesignRationale, Role, assign_roles, construct_detailed, construct_rationales};
pub use graph::{Edge, GraphNode, RelationGraph};
pub use output::{MinedIssue, MinedRationale, SentenceRef, render_markdown};

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("invalid relation graph: {0}")]
    InvalidGraph(String),
    #[error("unknown sentence {0}")]
    UnknownSentence(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Scores every sentence, summary included, in global index order.
pub fn score_sentences(
    doc: &IssueDocument,
    classifier: &SentenceClassifier,
    extractor: &FeatureExtractor,
) -> Result<Vec<(String, SentenceDecision)>, MinerError> {
    let decisions = par::try_map(&doc.sentences, |s| classifier.classify(doc, s, extractor))?;
    Ok(doc.sentences.iter().map(|s| s.id.clone()).zip(decisions).collect())
}

/// Ids of design-related sentences, in global index order.
pub fn run_dsea(
    doc: &IssueDocument,
    classifier: &SentenceClassifier,
    extractor: &FeatureExtractor,
) -> Result<Vec<String>, MinerError> {
    Ok(score_sentences(doc, classifier, extractor)?
        .into_iter()
        .filter(|(_, d)| d.design_related)
        .map(|(id, _)| id)
        .collect())
}

/// Outcome of querying one unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairQuery {
    pub first: String,
    pub second: String,
    pub forward: RelationLabel,
    /// Only asked when the forward answer is Supporting.
    pub reverse: Option<RelationLabel>,
}

fn ask(classifier: &PairClassifier, issue: &str, a: &crate::corpus::Sentence, b: &crate::corpus::Sentence) -> Result<RelationLabel, MinerError> {
    match classifier.classify(a, b) {
        Ok(PairDecision { label, .. }) => Ok(label),
        Err(BackendError::UnparsableResponse(text)) => {
            log::warn!("{issue}: unparsable relation for ({}, {}): {text:?}; treating as unrelated", a.id, b.id);
            Ok(RelationLabel::Unrelated)
        }
        Err(e) => Err(e.into()),
    }
}

/// Queries every unordered pair of `related` (earlier sentence first).
pub fn query_pairs(related: &[String], doc: &IssueDocument, classifier: &PairClassifier) -> Result<Vec<PairQuery>, MinerError> {
    let mut sentences = related
        .iter()
        .map(|id| doc.sentence(id).ok_or_else(|| MinerError::UnknownSentence(id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    sentences.sort_by_key(|s| s.global_index);
    sentences.dedup_by_key(|s| s.global_index);
    let mut pairs = Vec::new();
    for i in 0..sentences.len() {
        for j in i + 1..sentences.len() {
            pairs.push((sentences[i], sentences[j]));
        }
    }
    let issue = doc.key();
    par::try_map(&pairs, |(a, b)| {
        let forward = ask(classifier, issue, a, b)?;
        let reverse = match forward {
            RelationLabel::Supporting { .. } => Some(ask(classifier, issue, b, a)?),
            _ => None,
        };
        Ok(PairQuery { first: a.id.clone(), second: b.id.clone(), forward, reverse })
    })
}

/// Turns pair answers into edges. When both orders say Supporting, the
/// direction whose solution comes first in the document wins.
pub fn reconcile(queries: &[PairQuery], nodes: Vec<GraphNode>) -> Result<RelationGraph, MinerError> {
    let mut g = RelationGraph::new(nodes)?;
    for q in queries {
        let edge = match (&q.forward, &q.reverse) {
            (RelationLabel::Supporting { argument, solution }, Some(RelationLabel::Supporting { argument: ra, solution: rs })) => {
                let gi = |id: &str| g.global_index(id).ok_or_else(|| MinerError::UnknownSentence(id.to_owned()));
                if gi(rs)? < gi(solution)? {
                    Some(Edge::Supporting { argument: ra.clone(), solution: rs.clone() })
                } else {
                    Some(Edge::Supporting { argument: argument.clone(), solution: solution.clone() })
                }
            }
            (RelationLabel::Supporting { argument, solution }, _) => {
                Some(Edge::Supporting { argument: argument.clone(), solution: solution.clone() })
            }
            (RelationLabel::Complementary, _) => Some(Edge::Complementary { a: q.first.clone(), b: q.second.clone() }),
            (RelationLabel::Unrelated, _) => None,
        };
        if let Some(edge) = edge {
            g.add(edge)?;
        }
    }
    Ok(g)
}

pub fn run_dspa(related: &[String], doc: &IssueDocument, classifier: &PairClassifier) -> Result<RelationGraph, MinerError> {
    let queries = query_pairs(related, doc, classifier)?;
    let nodes = related
        .iter()
        .map(|id| {
            let s = doc.sentence(id).ok_or_else(|| MinerError::UnknownSentence(id.clone()))?;
            Ok(GraphNode { id: s.id.clone(), global_index: s.global_index })
        })
        .collect::<Result<Vec<_>, MinerError>>()?;
    reconcile(&queries, nodes)
}

/// End-to-end pipeline over raw issue logs.
#[derive(Debug)]
pub struct Miner {
    pub clean: CleanConfig,
    pub segmenter: Segmenter,
    pub extractor: FeatureExtractor,
    pub sentences: SentenceClassifier,
    pub pairs: PairClassifier,
}

impl Miner {
    pub fn new(sentences: SentenceClassifier, pairs: PairClassifier) -> Self {
        Self {
            clean: CleanConfig::default(),
            segmenter: Segmenter::default(),
            extractor: FeatureExtractor::default(),
            sentences,
            pairs,
        }
    }

    pub fn document(&self, raw: &IssueLog) -> IssueDocument {
        IssueDocument::build(raw, &self.clean, &self.segmenter)
    }

    pub fn mine_document(&self, doc: &IssueDocument) -> Result<MinedIssue, MinerError> {
        let related = run_dsea(doc, &self.sentences, &self.extractor)?;
        let graph = run_dspa(&related, doc, &self.pairs)?;
        let rationales = construct_rationales(&graph, doc.key());
        MinedIssue::resolve(doc, &rationales)
    }

    pub fn mine(&self, raw: &IssueLog) -> Result<MinedIssue, MinerError> {
        self.mine_document(&self.document(raw))
    }

    /// Mines every issue; one failure does not stop the others.
    pub fn mine_corpus(&self, issues: &[IssueLog]) -> BTreeMap<String, Result<MinedIssue, MinerError>> {
        issues
            .iter()
            .map(|i| i.key.clone())
            .zip(par::map(issues, |issue| self.mine(issue)))
            .collect()
    }
}
