//! Issue-log ingestion: export parsing, cleaning, sentence segmentation and
//! position indexing.

mod clean;
mod segment;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

pub use clean::{CODE_TOKEN, Charset, URL, URL_TOKEN, clean_text, clean_text_with, contains_code_delimiter};
pub use segment::{DEFAULT_ABBREVIATIONS, Segmenter, segment_sentences};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("malformed issue export: {0}")]
    MalformedExport(String),
    #[error("bad timestamp in {field}: {value:?}")]
    BadTimestamp { field: String, value: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate issue key {0}")]
    DuplicateKey(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub index: usize,
    pub author: String,
    pub timestamp: DateTime<Utc>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssueLog {
    pub key: String,
    pub project: String,
    pub summary: String,
    pub description: String,
    pub reporter: String,
    pub created: Option<DateTime<Utc>>,
    /// Chronological; `comments[i].index == i`.
    pub comments: Vec<Comment>,
}

#[derive(Deserialize)]
struct RawIssue {
    key: Option<String>,
    project: Option<String>,
    summary: Option<String>,
    description: Option<String>,
    reporter: Option<String>,
    created: Option<String>,
    #[serde(default)]
    comments: Vec<RawComment>,
}

#[derive(Deserialize)]
struct RawComment {
    author: Option<String>,
    created: Option<String>,
    body: Option<String>,
}

#[derive(Serialize)]
struct ExportIssue<'a> {
    key: &'a str,
    project: &'a str,
    summary: &'a str,
    description: &'a str,
    reporter: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    created: Option<String>,
    comments: Vec<ExportComment<'a>>,
}

#[derive(Serialize)]
struct ExportComment<'a> {
    author: &'a str,
    created: String,
    body: &'a str,
}

fn parse_timestamp(field: &str, value: &str) -> Result<DateTime<Utc>, CorpusError> {
    DateTime::parse_from_rfc3339(value)
        .or_else(|_| DateTime::parse_from_str(value, "%Y-%m-%dT%H:%M:%S%.f%z"))
        .or_else(|_| DateTime::parse_from_str(value, "%Y-%m-%d %H:%M:%S%.f%z"))
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| CorpusError::BadTimestamp {
            field: field.to_owned(),
            value: value.to_owned(),
        })
}

fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Parses one issue export document. Comments come back sorted by
/// timestamp (stable for equal timestamps) and densely re-indexed.
pub fn parse_issue(raw: &str) -> Result<IssueLog, CorpusError> {
    let raw: RawIssue = serde_json::from_str(raw)?;
    let key = raw
        .key
        .filter(|k| !k.trim().is_empty())
        .ok_or_else(|| CorpusError::MalformedExport("missing field `key`".into()))?;
    let summary = raw
        .summary
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| CorpusError::MalformedExport(format!("{key}: missing field `summary`")))?;
    let created = raw
        .created
        .as_deref()
        .map(|v| parse_timestamp("created", v))
        .transpose()?;

    let mut comments = raw
        .comments
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let field = format!("comments[{i}].created");
            let stamp = c
                .created
                .ok_or_else(|| CorpusError::MalformedExport(format!("{key}: missing field `{field}`")))?;
            Ok(Comment {
                index: i,
                author: c.author.unwrap_or_default(),
                timestamp: parse_timestamp(&field, &stamp)?,
                body: c.body.unwrap_or_default(),
            })
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;
    comments.sort_by_key(|c| c.timestamp);
    reindex(&mut comments);

    Ok(IssueLog {
        project: raw.project.unwrap_or_else(|| project_of(&key).to_owned()),
        key,
        summary,
        description: raw.description.unwrap_or_default(),
        reporter: raw.reporter.unwrap_or_default(),
        created,
        comments,
    })
}

fn reindex(comments: &mut [Comment]) {
    for (i, c) in comments.iter_mut().enumerate() {
        c.index = i;
    }
}

/// Project prefix of an issue key (`"FLINK-1320"` -> `"FLINK"`).
pub fn project_of(key: &str) -> &str {
    key.rsplit_once('-').map_or(key, |(p, _)| p)
}

impl IssueLog {
    /// Serializes back to the export format.
    pub fn to_export_json(&self) -> String {
        let doc = ExportIssue {
            key: &self.key,
            project: &self.project,
            summary: &self.summary,
            description: &self.description,
            reporter: &self.reporter,
            created: self.created.as_ref().map(format_timestamp),
            comments: self
                .comments
                .iter()
                .map(|c| ExportComment {
                    author: &c.author,
                    created: format_timestamp(&c.timestamp),
                    body: &c.body,
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("export serializes");
        out.push('\n');
        out
    }
}

/// Reads every `*.json` file in `dir` (sorted by file name).
pub fn load_corpus(dir: &Path) -> Result<Vec<IssueLog>, CorpusError> {
    let io = |source| CorpusError::Io { path: dir.to_owned(), source };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut issues: Vec<IssueLog> = Vec::with_capacity(paths.len());
    for path in paths {
        let issue = load_issue(&path)?;
        if issues.iter().any(|i| i.key == issue.key) {
            return Err(CorpusError::DuplicateKey(issue.key));
        }
        issues.push(issue);
    }
    Ok(issues)
}

pub fn load_issue(path: &Path) -> Result<IssueLog, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_issue(&text)
}

/// Cleaning options for whole issues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanConfig {
    /// Lowercase substrings; any author id containing one is a bot.
    pub bot_patterns: Vec<String>,
    /// Exact author ids treated as bots.
    pub bot_authors: Vec<String>,
    pub charset: Charset,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            bot_patterns: vec!["bot".into()],
            bot_authors: vec!["hudson".into(), "jiraposter".into(), "githubbot".into()],
            charset: Charset::default(),
        }
    }
}

impl CleanConfig {
    pub fn is_bot(&self, author: &str) -> bool {
        let lower = author.to_lowercase();
        self.bot_authors.iter().any(|a| a.eq_ignore_ascii_case(author))
            || self.bot_patterns.iter().any(|p| lower.contains(&p.to_lowercase()))
    }
}

/// Drops bot comments and cleans every text field.
pub fn clean_issue(issue: &IssueLog, config: &CleanConfig) -> IssueLog {
    let clean = |t: &str| clean_text_with(t, config.charset);
    let mut comments: Vec<Comment> = issue
        .comments
        .iter()
        .filter(|c| !config.is_bot(&c.author))
        .map(|c| Comment { body: clean(&c.body), ..c.clone() })
        .collect();
    reindex(&mut comments);
    IssueLog {
        summary: clean(&issue.summary),
        description: clean(&issue.description),
        comments,
        ..issue.clone()
    }
}

/// Where a sentence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SentenceSource {
    Summary,
    Description,
    Comment(usize),
}

impl fmt::Display for SentenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentenceSource::Summary => f.write_str("summary"),
            SentenceSource::Description => f.write_str("description"),
            SentenceSource::Comment(k) => write!(f, "comment:{k}"),
        }
    }
}

impl FromStr for SentenceSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "summary" => Ok(Self::Summary),
            "description" => Ok(Self::Description),
            _ => s
                .strip_prefix("comment:")
                .and_then(|k| k.parse().ok())
                .map(Self::Comment)
                .ok_or_else(|| format!("unknown sentence source {s:?}")),
        }
    }
}

impl Serialize for SentenceSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SentenceSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub issue_key: String,
    /// `sum-s0`, `d-s{j}` or `c{k}-s{j}`; unique within the issue.
    pub id: String,
    pub text: String,
    pub source: SentenceSource,
    pub sentence_index_in_source: usize,
    pub global_index: usize,
    pub author: String,
}

fn sentence_id(source: SentenceSource, j: usize) -> String {
    match source {
        SentenceSource::Summary => format!("sum-s{j}"),
        SentenceSource::Description => format!("d-s{j}"),
        SentenceSource::Comment(k) => format!("c{k}-s{j}"),
    }
}

/// Enumerates the sentences of an (already cleaned) issue: the summary as
/// one sentence, then description sentences, then comment sentences in
/// comment order.
pub fn enumerate_sentences(issue: &IssueLog, segmenter: &Segmenter) -> Vec<Sentence> {
    let summary = issue.summary.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut blocks: Vec<(SentenceSource, &str, Vec<String>)> =
        vec![(SentenceSource::Summary, issue.reporter.as_str(), vec![summary])];
    blocks.push((
        SentenceSource::Description,
        issue.reporter.as_str(),
        segmenter.segment(&issue.description),
    ));
    for c in &issue.comments {
        blocks.push((SentenceSource::Comment(c.index), c.author.as_str(), segmenter.segment(&c.body)));
    }

    let mut out = Vec::new();
    for (source, author, texts) in blocks {
        for (j, text) in texts.into_iter().enumerate() {
            out.push(Sentence {
                issue_key: issue.key.clone(),
                id: sentence_id(source, j),
                text,
                source,
                sentence_index_in_source: j,
                global_index: out.len(),
                author: author.to_owned(),
            });
        }
    }
    out
}

/// A cleaned issue together with its enumerated sentences.
#[derive(Debug, Clone)]
pub struct IssueDocument {
    pub log: IssueLog,
    pub sentences: Vec<Sentence>,
}

impl IssueDocument {
    /// Cleans `raw` and enumerates its sentences.
    pub fn build(raw: &IssueLog, clean: &CleanConfig, segmenter: &Segmenter) -> Self {
        Self::from_clean(clean_issue(raw, clean), segmenter)
    }

    /// Enumerates an issue that is already clean.
    pub fn from_clean(log: IssueLog, segmenter: &Segmenter) -> Self {
        let sentences = enumerate_sentences(&log, segmenter);
        Self { log, sentences }
    }

    pub fn key(&self) -> &str {
        &self.log.key
    }

    pub fn sentence(&self, id: &str) -> Option<&Sentence> {
        self.sentences.iter().find(|s| s.id == id)
    }

    pub fn summary(&self) -> &Sentence {
        &self.sentences[0]
    }

    /// Number of sentences produced by `source`.
    pub fn block_len(&self, source: SentenceSource) -> usize {
        self.sentences.iter().filter(|s| s.source == source).count()
    }

    /// Number of (non-bot) comments written by `author`.
    pub fn comments_by(&self, author: &str) -> usize {
        self.log.comments.iter().filter(|c| c.author == author).count()
    }
}
