//! Annotated sentences: JSON-lines I/O, validation, adjudication, gold
//! rationales and dataset counts.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::project_of;
use crate::miner::DesignRationale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceLabel {
    Solution,
    Argument,
    Unrelated,
}

impl fmt::Display for SentenceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SentenceLabel::Solution => "solution",
            SentenceLabel::Argument => "argument",
            SentenceLabel::Unrelated => "unrelated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub issue: String,
    pub sentence_id: String,
    pub text: String,
    pub label: SentenceLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argument_group_id: Option<String>,
}

impl AnnotatedSentence {
    fn check(&self) -> Result<(), String> {
        match (self.label, &self.rationale_id, &self.argument_group_id) {
            (SentenceLabel::Unrelated, _, Some(_)) => Err("unrelated sentence has an argument group".into()),
            (SentenceLabel::Solution | SentenceLabel::Argument, None, _) => Err(format!("{} needs a rationale_id", self.label)),
            (SentenceLabel::Argument, _, None) => Err("argument needs an argument_group_id".into()),
            (SentenceLabel::Solution, _, Some(_)) => Err("solution has an argument_group_id".into()),
            _ => Ok(()),
        }
    }
}

/// Parses JSON lines; blank lines are skipped.
pub fn parse_annotations(text: &str) -> Result<Vec<AnnotatedSentence>, EvalError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let a: AnnotatedSentence = serde_json::from_str(line)
            .map_err(|e| EvalError::InvalidAnnotation { line: n + 1, reason: e.to_string() })?;
        a.check().map_err(|reason| EvalError::InvalidAnnotation { line: n + 1, reason })?;
        out.push(a);
    }
    Ok(out)
}

pub fn read_annotations(path: &Path) -> Result<Vec<AnnotatedSentence>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_owned(), source })?;
    parse_annotations(&text)
}

/// Reads every `*.jsonl` file of a directory (or a single file), sorted by name.
pub fn read_annotation_set(path: &Path) -> Result<Vec<AnnotatedSentence>, EvalError> {
    if path.is_file() {
        return read_annotations(path);
    }
    let io = |source| EvalError::Io { path: path.to_owned(), source };
    let mut files: Vec<_> = std::fs::read_dir(path)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        out.extend(read_annotations(&f)?);
    }
    Ok(out)
}

pub fn to_jsonl(anns: &[AnnotatedSentence]) -> String {
    anns.iter().map(|a| serde_json::to_string(a).expect("annotation serializes") + "\n").collect()
}

/// Checks per-record rules, unique ids, that each rationale has a solution,
/// and that each argument group stays inside one rationale.
pub fn validate_annotations(anns: &[AnnotatedSentence]) -> Result<(), EvalError> {
    let mut seen = BTreeMap::new();
    let mut has_solution: BTreeMap<(&str, &str), bool> = BTreeMap::new();
    let mut group_owner: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    for (n, a) in anns.iter().enumerate() {
        let invalid = |reason: String| EvalError::InvalidAnnotation { line: n + 1, reason };
        a.check().map_err(invalid)?;
        if seen.insert((a.issue.as_str(), a.sentence_id.as_str()), ()).is_some() {
            return Err(invalid(format!("{} / {} annotated twice", a.issue, a.sentence_id)));
        }
        if let Some(r) = &a.rationale_id {
            *has_solution.entry((&a.issue, r)).or_default() |= a.label == SentenceLabel::Solution;
        }
        if let (Some(r), Some(g)) = (&a.rationale_id, &a.argument_group_id) {
            let owner = *group_owner.entry((&a.issue, g)).or_insert(r);
            if owner != r {
                return Err(invalid(format!("argument group {g} spans rationales {owner} and {r}")));
            }
        }
    }
    if let Some(((issue, r), _)) = has_solution.iter().find(|(_, ok)| !**ok) {
        return Err(EvalError::InvalidAnnotation { line: 0, reason: format!("{issue}: rationale {r} has no solution sentence") });
    }
    Ok(())
}

/// Majority vote over three annotators. On a three-way split the expert's
/// record stands; otherwise ids come from a voter on the majority side,
/// preferring the expert.
pub fn adjudicate(
    a: &[AnnotatedSentence],
    b: &[AnnotatedSentence],
    expert: &[AnnotatedSentence],
) -> Result<Vec<AnnotatedSentence>, EvalError> {
    let index = |s: &[AnnotatedSentence]| -> BTreeMap<(String, String), AnnotatedSentence> {
        s.iter().map(|x| ((x.issue.clone(), x.sentence_id.clone()), x.clone())).collect()
    };
    let (ia, ib) = (index(a), index(b));
    let ie = index(expert);
    if ia.len() != a.len() || ib.len() != b.len() || ie.len() != expert.len() {
        return Err(EvalError::CoverageMismatch("a stream annotates a sentence twice".into()));
    }
    if !ia.keys().eq(ie.keys()) || !ib.keys().eq(ie.keys()) {
        let missing = ie
            .keys()
            .chain(ia.keys())
            .chain(ib.keys())
            .find(|k| !(ia.contains_key(*k) && ib.contains_key(*k) && ie.contains_key(*k)))
            .expect("key sets differ");
        return Err(EvalError::CoverageMismatch(format!("{} / {} is not covered by every annotator", missing.0, missing.1)));
    }
    Ok(expert
        .iter()
        .map(|e| {
            let key = (e.issue.clone(), e.sentence_id.clone());
            let (x, y) = (&ia[&key], &ib[&key]);
            if e.label == x.label || e.label == y.label || x.label != y.label {
                e.clone()
            } else {
                x.clone()
            }
        })
        .collect())
}

/// Gold rationales per issue in file order; rationales are ordered by their
/// first solution sentence, argument groups by first appearance.
pub fn gold_rationales(anns: &[AnnotatedSentence]) -> BTreeMap<String, Vec<DesignRationale>> {
    let mut by_issue: BTreeMap<String, Vec<&AnnotatedSentence>> = BTreeMap::new();
    for a in anns {
        by_issue.entry(a.issue.clone()).or_default().push(a);
    }
    by_issue
        .into_iter()
        .map(|(issue, rows)| {
            let mut order: Vec<&str> = Vec::new();
            let mut solutions: BTreeMap<&str, Vec<String>> = BTreeMap::new();
            let mut groups: BTreeMap<&str, Vec<(&str, Vec<String>)>> = BTreeMap::new();
            for a in &rows {
                let Some(r) = a.rationale_id.as_deref() else { continue };
                match a.label {
                    SentenceLabel::Solution => {
                        if !solutions.contains_key(r) {
                            order.push(r);
                        }
                        solutions.entry(r).or_default().push(a.sentence_id.clone());
                    }
                    SentenceLabel::Argument => {
                        let g = a.argument_group_id.as_deref().unwrap_or(r);
                        let gs = groups.entry(r).or_default();
                        match gs.iter_mut().find(|(id, _)| *id == g) {
                            Some((_, members)) => members.push(a.sentence_id.clone()),
                            None => gs.push((g, vec![a.sentence_id.clone()])),
                        }
                    }
                    SentenceLabel::Unrelated => {}
                }
            }
            let rationales = order
                .into_iter()
                .map(|r| DesignRationale {
                    issue_key: issue.clone(),
                    solution: solutions.remove(r).unwrap_or_default(),
                    arguments: groups.remove(r).unwrap_or_default().into_iter().map(|(_, m)| m).collect(),
                })
                .collect();
            (issue, rationales)
        })
        .collect()
}

/// `(issue, sentence id)` of every sentence not labelled unrelated.
pub fn gold_related(anns: &[AnnotatedSentence]) -> std::collections::BTreeSet<(String, String)> {
    anns.iter()
        .filter(|a| a.label != SentenceLabel::Unrelated)
        .map(|a| (a.issue.clone(), a.sentence_id.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub solution: usize,
    pub argument: usize,
    pub unrelated: usize,
    pub total: usize,
}

impl LabelCounts {
    fn count(&mut self, label: SentenceLabel) {
        match label {
            SentenceLabel::Solution => self.solution += 1,
            SentenceLabel::Argument => self.argument += 1,
            SentenceLabel::Unrelated => self.unrelated += 1,
        }
        self.total += 1;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub projects: BTreeMap<String, LabelCounts>,
    pub issues: BTreeMap<String, usize>,
    pub total: LabelCounts,
}

pub fn summarize_dataset(anns: &[AnnotatedSentence]) -> DatasetSummary {
    let mut s = DatasetSummary::default();
    let mut issues: BTreeMap<String, std::collections::BTreeSet<&str>> = BTreeMap::new();
    for a in anns {
        let project = project_of(&a.issue).to_owned();
        s.projects.entry(project.clone()).or_default().count(a.label);
        issues.entry(project).or_default().insert(&a.issue);
        s.total.count(a.label);
    }
    s.issues = issues.into_iter().map(|(p, set)| (p, set.len())).collect();
    s
}

impl DatasetSummary {
    pub fn to_text(&self) -> String {
        let width = self.projects.keys().map(String::len).max().unwrap_or(0).max("project".len()).max("total".len());
        let mut out = format!(
            "{:<width$}  {:>6}  {:>8}  {:>8}  {:>9}  {:>5}\n",
            "project", "issues", "solution", "argument", "unrelated", "total"
        );
        let row = |name: &str, issues: usize, c: &LabelCounts| {
            format!(
                "{name:<width$}  {issues:>6}  {:>8}  {:>8}  {:>9}  {:>5}\n",
                c.solution, c.argument, c.unrelated, c.total
            )
        };
        for (p, c) in &self.projects {
            out.push_str(&row(p, self.issues[p], c));
        }
        out.push_str(&row("total", self.issues.values().sum(), &self.total));
        out
    }
}
