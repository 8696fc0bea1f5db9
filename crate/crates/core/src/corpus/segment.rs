//! Rule-based sentence boundary detection.

use std::collections::HashSet;
use std::sync::LazyLock;

use regex::Regex;

/// Abbreviations that never end a sentence unless configured otherwise.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &["e.g.", "i.e.", "etc.", "mr.", "mrs.", "ms.", "dr.", "vs.", "cf."];

static PARAGRAPH_BREAK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\n[ \t\r]*\n").expect("paragraph regex"));

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{2019}', '\u{201d}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '\u{2018}', '\u{201c}'];

/// Splits cleaned text into sentences.
///
/// A whitespace-delimited token ends a sentence when, after dropping closing
/// quotes and brackets, it ends with `.`, `!` or `?`. Tokens listed as
/// abbreviations do not end sentences; blank lines always do. Output
/// sentences have their whitespace runs collapsed to single spaces.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: HashSet<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl Segmenter {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.as_ref().to_lowercase())
                .collect(),
        }
    }

    pub fn segment(&self, text: &str) -> Vec<String> {
        let mut sentences = Vec::new();
        for paragraph in PARAGRAPH_BREAK.split(text) {
            let mut current: Vec<&str> = Vec::new();
            for token in paragraph.split_whitespace() {
                current.push(token);
                if self.ends_sentence(token) {
                    sentences.push(current.join(" "));
                    current.clear();
                }
            }
            if !current.is_empty() {
                sentences.push(current.join(" "));
            }
        }
        sentences
    }

    fn ends_sentence(&self, token: &str) -> bool {
        let core = token.trim_end_matches(CLOSERS);
        if !core.ends_with(['.', '!', '?']) {
            return false;
        }
        if core.ends_with(['!', '?']) {
            return true;
        }
        let word = core.trim_start_matches(OPENERS).to_lowercase();
        !self.abbreviations.contains(&word)
    }
}

/// Segments with the default abbreviation list.
pub fn segment_sentences(text: &str) -> Vec<String> {
    Segmenter::default().segment(text)
}
