//! Lexicon and rule based sentiment scoring, compatible with VADER.
//!
//! Scores are left unrounded. Input without tokens scores as fully neutral.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, LazyLock};

use serde::{Deserialize, Serialize};

use super::FeatureError;

const EMBEDDED_LEXICON: &str = include_str!("../../data/vader_lexicon.txt");

const B_INCR: f64 = 0.293;
const B_DECR: f64 = -0.293;
const C_INCR: f64 = 0.733;
const N_SCALAR: f64 = -0.74;
const NORMALIZE_ALPHA: f64 = 15.0;

const NEGATE: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't", "can't",
    "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent", "isnt", "mightnt", "mustnt",
    "neither", "don't", "hadn't", "hasn't", "haven't", "isn't", "mightn't", "mustn't", "neednt", "needn't",
    "never", "none", "nope", "nor", "not", "nothing", "nowhere", "oughtnt", "shant", "shouldnt", "uhuh",
    "wasnt", "werent", "oughtn't", "shan't", "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont",
    "wouldnt", "won't", "wouldn't", "rarely", "seldom", "despite",
];

const BOOST_UP: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably", "decidedly", "deeply",
    "effing", "enormous", "enormously", "entirely", "especially", "exceptional", "exceptionally", "extreme",
    "extremely", "fabulously", "flipping", "flippin", "frackin", "fracking", "fricking", "frickin", "frigging",
    "friggin", "fully", "fuckin", "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely",
    "incredible", "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally", "tremendous",
    "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly", "very",
];

const BOOST_DOWN: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less", "little",
    "marginal", "marginally", "occasional", "occasionally", "partly", "scarce", "scarcely", "slight", "slightly",
    "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

fn booster(word: &str) -> Option<f64> {
    if BOOST_UP.contains(&word) {
        Some(B_INCR)
    } else if BOOST_DOWN.contains(&word) {
        Some(B_DECR)
    } else {
        None
    }
}

fn special_case(phrase: &str) -> Option<f64> {
    SPECIAL_CASES.iter().find(|(p, _)| *p == phrase).map(|(_, v)| *v)
}

fn is_negation(word: &str) -> bool {
    NEGATE.contains(&word) || word.contains("n't")
}

/// Python's `str.isupper`: at least one cased character and no lowercase.
fn is_upper(word: &str) -> bool {
    word.chars().any(char::is_uppercase) && !word.chars().any(char::is_lowercase)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScores {
    pub pos: f64,
    pub neu: f64,
    pub neg: f64,
    pub compound: f64,
}

impl SentimentScores {
    pub const NEUTRAL: Self = Self { pos: 0.0, neu: 1.0, neg: 0.0, compound: 0.0 };
}

/// Token -> mean valence table.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
}

static EMBEDDED: LazyLock<Arc<Lexicon>> = LazyLock::new(|| Arc::new(Lexicon::parse(EMBEDDED_LEXICON)));

impl Lexicon {
    /// Parses the tab-separated lexicon format (token, valence, ...).
    /// Lines without a numeric second column are skipped.
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|line| {
                let mut cols = line.trim_end_matches('\r').split('\t');
                let token = cols.next()?.trim();
                let valence = cols.next()?.trim().parse::<f64>().ok()?;
                (!token.is_empty()).then(|| (token.to_owned(), valence))
            })
            .collect();
        Self { entries }
    }

    pub fn load(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::MissingLexicon {
            path: path.to_owned(),
            source,
        })?;
        Ok(Self::parse(&text))
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SentimentAnalyzer {
    lexicon: Arc<Lexicon>,
}

impl Default for SentimentAnalyzer {
    fn default() -> Self {
        Self { lexicon: EMBEDDED.clone() }
    }
}

struct Tokens<'a> {
    raw: Vec<&'a str>,
    lower: Vec<String>,
    cap_differential: bool,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let raw: Vec<&str> = text
            .split_whitespace()
            .map(|t| {
                let stripped = t.trim_matches(|c: char| c.is_ascii_punctuation());
                // Two or fewer characters left means an emoticon like ":)".
                if stripped.chars().count() <= 2 { t } else { stripped }
            })
            .collect();
        let caps = raw.iter().filter(|w| is_upper(w)).count();
        let diff = raw.len() - caps;
        Self {
            lower: raw.iter().map(|w| w.to_lowercase()).collect(),
            cap_differential: diff > 0 && diff < raw.len(),
            raw,
        }
    }
}

impl SentimentAnalyzer {
    pub fn new(lexicon: Lexicon) -> Self {
        Self { lexicon: Arc::new(lexicon) }
    }

    pub fn from_path(path: &Path) -> Result<Self, FeatureError> {
        Lexicon::load(path).map(Self::new)
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn scores(&self, text: &str) -> SentimentScores {
        let text = text.trim();
        let tokens = Tokens::new(text);
        if tokens.raw.is_empty() {
            return SentimentScores::NEUTRAL;
        }

        let mut sentiments = Vec::with_capacity(tokens.raw.len());
        for i in 0..tokens.raw.len() {
            let lower = tokens.lower[i].as_str();
            let kind_of = lower == "kind" && tokens.lower.get(i + 1).is_some_and(|n| n == "of");
            if booster(lower).is_some() || kind_of {
                sentiments.push(0.0);
                continue;
            }
            sentiments.push(self.valence(&tokens, i));
        }
        but_check(&tokens.lower, &mut sentiments);
        score_valence(&sentiments, text)
    }

    fn in_lexicon(&self, word: &str) -> bool {
        self.lexicon.contains(word)
    }

    fn valence(&self, t: &Tokens<'_>, i: usize) -> f64 {
        let words = &t.lower;
        let Some(base) = self.lexicon.get(&words[i]) else {
            return 0.0;
        };
        let mut valence = base;

        if words[i] == "no" && i + 1 < words.len() && self.in_lexicon(&words[i + 1]) {
            valence = 0.0;
        }
        if (i > 0 && words[i - 1] == "no")
            || (i > 1 && words[i - 2] == "no")
            || (i > 2 && words[i - 3] == "no" && (words[i - 1] == "or" || words[i - 1] == "nor"))
        {
            valence = base * N_SCALAR;
        }

        if is_upper(t.raw[i]) && t.cap_differential {
            if valence > 0.0 {
                valence += C_INCR;
            } else {
                valence -= C_INCR;
            }
        }

        for start in 0..3 {
            if i > start && !self.in_lexicon(&words[i - (start + 1)]) {
                let mut s = scalar_inc_dec(t.raw[i - (start + 1)], valence, t.cap_differential);
                if start == 1 && s != 0.0 {
                    s *= 0.95;
                }
                if start == 2 && s != 0.0 {
                    s *= 0.9;
                }
                valence += s;
                valence = negation_check(valence, words, start, i);
                if start == 2 {
                    valence = special_idioms_check(valence, words, i);
                }
            }
        }

        self.least_check(valence, words, i)
    }

    fn least_check(&self, valence: f64, words: &[String], i: usize) -> f64 {
        if i > 1 && !self.in_lexicon(&words[i - 1]) && words[i - 1] == "least" {
            if words[i - 2] != "at" && words[i - 2] != "very" {
                return valence * N_SCALAR;
            }
        } else if i > 0 && !self.in_lexicon(&words[i - 1]) && words[i - 1] == "least" {
            return valence * N_SCALAR;
        }
        valence
    }
}

fn scalar_inc_dec(word: &str, valence: f64, cap_differential: bool) -> f64 {
    let Some(mut scalar) = booster(&word.to_lowercase()) else {
        return 0.0;
    };
    if valence < 0.0 {
        scalar = -scalar;
    }
    if is_upper(word) && cap_differential {
        if valence > 0.0 {
            scalar += C_INCR;
        } else {
            scalar -= C_INCR;
        }
    }
    scalar
}

fn negation_check(valence: f64, w: &[String], start: usize, i: usize) -> f64 {
    let so_this = |x: &str| x == "so" || x == "this";
    match start {
        0 if is_negation(&w[i - 1]) => valence * N_SCALAR,
        1 => {
            if w[i - 2] == "never" && so_this(&w[i - 1]) {
                valence * 1.25
            } else if w[i - 2] == "without" && w[i - 1] == "doubt" {
                valence
            } else if is_negation(&w[i - 2]) {
                valence * N_SCALAR
            } else {
                valence
            }
        }
        2 => {
            if (w[i - 3] == "never" && so_this(&w[i - 2])) || so_this(&w[i - 1]) {
                valence * 1.25
            } else if w[i - 3] == "without" && (w[i - 2] == "doubt" || w[i - 1] == "doubt") {
                valence
            } else if is_negation(&w[i - 3]) {
                valence * N_SCALAR
            } else {
                valence
            }
        }
        _ => valence,
    }
}

fn special_idioms_check(mut valence: f64, w: &[String], i: usize) -> f64 {
    let one_zero = format!("{} {}", w[i - 1], w[i]);
    let two_one_zero = format!("{} {} {}", w[i - 2], w[i - 1], w[i]);
    let two_one = format!("{} {}", w[i - 2], w[i - 1]);
    let three_two_one = format!("{} {} {}", w[i - 3], w[i - 2], w[i - 1]);
    let three_two = format!("{} {}", w[i - 3], w[i - 2]);

    for seq in [&one_zero, &two_one_zero, &two_one, &three_two_one, &three_two] {
        if let Some(v) = special_case(seq) {
            valence = v;
            break;
        }
    }
    if w.len() - 1 > i
        && let Some(v) = special_case(&format!("{} {}", w[i], w[i + 1]))
    {
        valence = v;
    }
    if w.len() - 1 > i + 1
        && let Some(v) = special_case(&format!("{} {} {}", w[i], w[i + 1], w[i + 2]))
    {
        valence = v;
    }
    for n_gram in [&three_two_one, &three_two, &two_one] {
        if let Some(b) = booster(n_gram) {
            valence += b;
        }
    }
    valence
}

/// Contrastive "but": halves valences before it and boosts those after.
///
/// Each step rescales the first entry equal to the current one, which is
/// how the reference implementation behaves on repeated values.
fn but_check(words: &[String], sentiments: &mut [f64]) {
    let Some(bi) = words.iter().position(|w| w == "but") else {
        return;
    };
    for p in 0..sentiments.len() {
        let v = sentiments[p];
        let si = sentiments.iter().position(|x| *x == v).unwrap_or(p);
        if si < bi {
            sentiments[si] = v * 0.5;
        } else if si > bi {
            sentiments[si] = v * 1.5;
        }
    }
}

fn punctuation_emphasis(text: &str) -> f64 {
    let bangs = text.matches('!').count().min(4);
    let qmarks = text.matches('?').count();
    let qm = match qmarks {
        0 | 1 => 0.0,
        2 | 3 => qmarks as f64 * 0.18,
        _ => 0.96,
    };
    bangs as f64 * 0.292 + qm
}

/// Bounded normalisation `s / sqrt(s^2 + 15)`.
pub fn normalize(score: f64) -> f64 {
    (score / (score * score + NORMALIZE_ALPHA).sqrt()).clamp(-1.0, 1.0)
}

fn score_valence(sentiments: &[f64], text: &str) -> SentimentScores {
    let emphasis = punctuation_emphasis(text);
    let mut sum: f64 = sentiments.iter().sum();
    if sum > 0.0 {
        sum += emphasis;
    } else if sum < 0.0 {
        sum -= emphasis;
    }
    let compound = normalize(sum);

    let mut pos_sum = 0.0;
    let mut neg_sum = 0.0;
    let mut neu_count = 0usize;
    for &s in sentiments {
        if s > 0.0 {
            pos_sum += s + 1.0;
        }
        if s < 0.0 {
            neg_sum += s - 1.0;
        }
        if s == 0.0 {
            neu_count += 1;
        }
    }
    if pos_sum > neg_sum.abs() {
        pos_sum += emphasis;
    } else if pos_sum < neg_sum.abs() {
        neg_sum -= emphasis;
    }
    let total = pos_sum + neg_sum.abs() + neu_count as f64;
    SentimentScores {
        pos: (pos_sum / total).abs(),
        neu: (neu_count as f64 / total).abs(),
        neg: (neg_sum / total).abs(),
        compound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neutral_sentence() {
        let s = SentimentAnalyzer::default().scores("The cat sat on the mat.");
        assert_eq!(s, SentimentScores::NEUTRAL);
    }

    #[test]
    fn empty_is_neutral() {
        assert_eq!(SentimentAnalyzer::default().scores(""), SentimentScores::NEUTRAL);
        assert_eq!(SentimentAnalyzer::default().scores("   "), SentimentScores::NEUTRAL);
    }

    #[test]
    fn polarity_direction() {
        let a = SentimentAnalyzer::default();
        assert!(a.scores("This is great!").compound > 0.5);
        assert!(a.scores("This is terrible.").compound < -0.4);
    }

    #[test]
    fn embedded_lexicon_is_complete() {
        let a = SentimentAnalyzer::default();
        assert_eq!(a.lexicon().len(), 7506);
        assert_eq!(a.lexicon().get("great"), Some(3.1));
        // Duplicated entries: the last line wins.
        assert_eq!(a.lexicon().get("ok"), Some(1.2));
    }

    #[test]
    fn missing_lexicon_file() {
        let err = SentimentAnalyzer::from_path(Path::new("/nonexistent/lexicon.txt")).unwrap_err();
        assert!(matches!(err, FeatureError::MissingLexicon { .. }));
    }

    #[test]
    fn custom_lexicon() {
        let a = SentimentAnalyzer::new(Lexicon::parse("shiny\t2.0\t0.5\t[]\n"));
        let s = a.scores("shiny code");
        assert!((s.compound - normalize(2.0)).abs() < 1e-12);
        assert!((s.pos + s.neu + s.neg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_matches_closed_form() {
        assert!((normalize(1.0) - 1.0 / 16f64.sqrt()).abs() < 1e-15);
        assert_eq!(normalize(0.0), 0.0);
    }
}
