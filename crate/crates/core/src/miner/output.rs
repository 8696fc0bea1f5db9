use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{DesignRationale, MinerError};
use crate::corpus::IssueDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRef {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinedRationale {
    pub solution: Vec<SentenceRef>,
    pub arguments: Vec<Vec<SentenceRef>>,
}

/// Mined rationales of one issue with sentence text attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinedIssue {
    pub issue_key: String,
    pub rationales: Vec<MinedRationale>,
}

impl MinedIssue {
    pub fn resolve(doc: &IssueDocument, rationales: &[DesignRationale]) -> Result<Self, MinerError> {
        let refs = |ids: &[String]| {
            ids.iter()
                .map(|id| {
                    let s = doc.sentence(id).ok_or_else(|| MinerError::UnknownSentence(id.clone()))?;
                    Ok(SentenceRef { id: s.id.clone(), text: s.text.clone() })
                })
                .collect::<Result<Vec<_>, MinerError>>()
        };
        let rationales = rationales
            .iter()
            .map(|r| {
                Ok(MinedRationale {
                    solution: refs(&r.solution)?,
                    arguments: r.arguments.iter().map(|g| refs(g)).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<_, MinerError>>()?;
        Ok(Self { issue_key: doc.key().to_owned(), rationales })
    }

    /// Id-only view, e.g. for evaluation.
    pub fn to_rationales(&self) -> Vec<DesignRationale> {
        let ids = |refs: &[SentenceRef]| refs.iter().map(|r| r.id.clone()).collect();
        self.rationales
            .iter()
            .map(|r| DesignRationale {
                issue_key: self.issue_key.clone(),
                solution: ids(&r.solution),
                arguments: r.arguments.iter().map(|g| ids(g)).collect(),
            })
            .collect()
    }

    /// Two-space indented JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mined output serializes");
        s.push('\n');
        s
    }

    pub fn to_markdown(&self) -> String {
        render_markdown(std::slice::from_ref(self))
    }
}

fn joined(refs: &[SentenceRef]) -> String {
    refs.iter().map(|r| r.text.as_str()).collect::<Vec<_>>().join(" ")
}

/// Solutions as top-level bullets, their argument groups nested below.
pub fn render_markdown(issues: &[MinedIssue]) -> String {
    let mut out = String::new();
    for (n, issue) in issues.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# {}\n", issue.issue_key);
        if issue.rationales.is_empty() {
            out.push_str("No design rationales found.\n");
            continue;
        }
        for r in &issue.rationales {
            let _ = writeln!(out, "- Solution: {}", joined(&r.solution));
            for g in &r.arguments {
                let _ = writeln!(out, "  - Argument: {}", joined(g));
            }
        }
    }
    out
}
