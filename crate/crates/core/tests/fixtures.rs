//! Checks against the hand-built Flink fixtures and the segmentation suite.

mod common;

use std::sync::Arc;

use common::{close, fixture, read_fixture};
use rationale_miner::backends::{
    Backend, HeadModel, PairClassifier, ScriptedBackend, SentenceClassifier, sp_fingerprint,
};
use rationale_miner::corpus::{CleanConfig, IssueDocument, Segmenter, load_issue};
use rationale_miner::features::{FeatureExtractor, SENTENCE_FEATURE_NAMES, extract_pair_features};
use rationale_miner::miner::{MinedIssue, Miner, run_dsea};
use rationale_miner::prompts::{PunctuationCounter, TokenBudget, build_dspa_prompt};
use serde_json::Value;

fn flink() -> IssueDocument {
    let raw = load_issue(&fixture("flink-1320.json")).unwrap();
    IssueDocument::build(&raw, &CleanConfig::default(), &Segmenter::default())
}

fn scripted() -> Arc<dyn Backend> {
    Arc::new(ScriptedBackend::from_path(&fixture("flink-1320-script.json")).unwrap())
}

fn head_classifier() -> SentenceClassifier {
    let head = HeadModel::load(&fixture("head-unit.json")).unwrap();
    SentenceClassifier::prompt_head(scripted(), head, TokenBudget::dsea_default()).unwrap()
}

#[test]
fn segmentation_suite() {
    let text = read_fixture("segmentation.txt");
    let segmenter = Segmenter::default();
    let mut cases = 0;
    let text: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    for block in text.split("\n=== ").map(|b| b.trim_start_matches("=== ")) {
        let (name, rest) = block.split_once('\n').unwrap();
        let (input, expected) = rest.split_once("\n---\n").unwrap_or_else(|| panic!("case {name}: no separator"));
        let expected: Vec<&str> = expected.lines().filter(|l| !l.is_empty()).collect();
        assert_eq!(segmenter.segment(input), expected, "case {name:?}");
        cases += 1;
    }
    assert!(cases >= 8, "only {cases} segmentation cases parsed");
}

#[test]
fn sentence_table_matches_fixture() {
    let doc = flink();
    let want: Vec<Value> = serde_json::from_str(&read_fixture("flink-1320-sentences.json")).unwrap();
    assert_eq!(doc.sentences.len(), want.len());
    for (s, w) in doc.sentences.iter().zip(&want) {
        assert_eq!(s.id, w["id"].as_str().unwrap());
        assert_eq!(s.source.to_string(), w["source"].as_str().unwrap(), "{}", s.id);
        assert_eq!(s.sentence_index_in_source as u64, w["sentence_index_in_source"].as_u64().unwrap(), "{}", s.id);
        assert_eq!(s.global_index as u64, w["global_index"].as_u64().unwrap(), "{}", s.id);
        assert_eq!(s.author, w["author"].as_str().unwrap(), "{}", s.id);
        assert_eq!(s.text, w["text"].as_str().unwrap(), "{}", s.id);
    }
}

#[test]
fn feature_vector_matches_fixture() {
    let doc = flink();
    let want: Value = serde_json::from_str(&read_fixture("features-flink-1320.json")).unwrap();
    let id = want["sentence_id"].as_str().unwrap();
    let got = FeatureExtractor::default().sentence_features_by_id(&doc, id).unwrap().to_vec();
    let table = want["features"].as_object().unwrap();
    assert_eq!(table.len(), SENTENCE_FEATURE_NAMES.len());
    for (name, value) in SENTENCE_FEATURE_NAMES.iter().zip(&got) {
        let expected = table[*name].as_f64().unwrap_or_else(|| panic!("fixture lacks {name}"));
        assert!(close(*value, expected, 1e-9), "{name}: {value} vs {expected}");
    }
}

#[test]
fn dspa_prompt_is_byte_exact() {
    let doc = flink();
    let (s1, s2) = (doc.sentence("c0-s0").unwrap(), doc.sentence("c0-s1").unwrap());
    let pf = extract_pair_features(s1, s2).unwrap();
    let prompt = build_dspa_prompt(s1, s2, pf, TokenBudget::dspa_default(), &PunctuationCounter).unwrap();
    assert_eq!(prompt.render(), read_fixture("dspa-prompt-c0-s0_c0-s1.txt"));
}

#[test]
fn dsea_stage_matches_fixture() {
    let doc = flink();
    let want: Vec<String> = serde_json::from_str(&read_fixture("dsea-expected.json")).unwrap();
    let got = run_dsea(&doc, &head_classifier(), &FeatureExtractor::default()).unwrap();
    assert_eq!(got, want);
}

#[test]
fn unit_head_scores_first_polarity_through_logistic() {
    let head = HeadModel::load(&fixture("head-unit.json")).unwrap();
    assert_eq!(head.fingerprint, sp_fingerprint());
    let mut x = vec![0.0; 43];
    x[0] = 1.0;
    let p = head.positive_probability(&x).unwrap();
    assert!(close(p, 1.0 / (1.0 + (-0.5f64).exp()), 1e-12), "{p}");
    assert!(close(p, 0.6225, 1e-4));
}

#[test]
fn library_pipeline_reproduces_golden_output() {
    let raw = load_issue(&fixture("flink-1320.json")).unwrap();
    let miner = Miner::new(head_classifier(), PairClassifier::remote(scripted(), TokenBudget::dspa_default()));
    let mined: MinedIssue = miner.mine(&raw).unwrap();
    assert_eq!(mined.to_json(), read_fixture("mined-expected.json"));
}
