//! Dataset tooling and evaluation: annotations, adjudication, splitting,
//! metrics, ablation, and a synthetic corpus.

mod annotations;
mod metrics;
mod split;
mod synthetic;
mod training;

use std::path::PathBuf;

use thiserror::Error;

use crate::backends::BackendError;
use crate::features::FeatureError;

pub use annotations::{
    AnnotatedSentence, DatasetSummary, LabelCounts, SentenceLabel, adjudicate, gold_rationales, gold_related,
    parse_annotations, read_annotation_set, read_annotations, summarize_dataset, to_jsonl, validate_annotations,
};
pub use metrics::{
    EvalReport, Score, SentenceScores, SentenceTallies, Tally, dsea_tally, eval_dsea, eval_rationales, eval_sentences,
    evaluate_corpus, f1, map_to_gold, rationale_tally, score_table, sentence_tallies,
};
pub use split::{Split, group_by_project, split_dataset};
pub use synthetic::{SENTENCES_PER_ISSUE, SyntheticCorpus, synthetic_corpus};
pub use training::{
    AblationReport, AblationRow, ExtractionMode, LabeledDocument, ablate, ablate_all, evaluate_extractor, label_documents,
    majority_score, pair_examples, sentence_examples, train_baselines, train_extractor,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("annotator streams disagree on coverage: {0}")]
    CoverageMismatch(String),
    #[error("project {project} has {count} issue(s); at least 2 are needed")]
    TooFewIssues { project: String, count: usize },
    #[error("annotation line {line}: {reason}")]
    InvalidAnnotation { line: usize, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}
