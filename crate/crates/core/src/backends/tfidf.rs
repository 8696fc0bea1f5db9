//! Smoothed TF-IDF over lowercased whitespace tokens.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// Lowercased whitespace tokens with leading/trailing punctuation trimmed.
/// Placeholder tokens such as `[code]` keep their brackets.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let lower = raw.to_lowercase();
            let t = if lower.contains("[code]") || lower.contains("[url]") {
                lower.trim_matches(|c: char| !c.is_alphanumeric() && c != '[' && c != ']')
            } else {
                lower.trim_matches(|c: char| !c.is_alphanumeric())
            };
            (!t.is_empty()).then(|| t.to_owned())
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfidfVectorizer {
    /// Token → column, columns assigned in lexicographic order.
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
}

impl TfidfVectorizer {
    /// Keeps tokens appearing in at least `min_df` documents.
    pub fn fit<S: AsRef<str>>(docs: &[S], min_df: usize) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in docs {
            let unique: BTreeSet<String> = tokenize(doc.as_ref()).into_iter().collect();
            for t in unique {
                *df.entry(t).or_default() += 1;
            }
        }
        let n = docs.len() as f64;
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::new();
        for (token, count) in df.into_iter().filter(|(_, c)| *c >= min_df) {
            vocabulary.insert(token, idf.len());
            idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
        }
        Self { vocabulary, idf }
    }

    pub fn len(&self) -> usize {
        self.idf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idf.is_empty()
    }

    /// Column names in column order.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); self.len()];
        for (token, &i) in &self.vocabulary {
            names[i] = format!("tfidf.{token}");
        }
        names
    }

    /// L2-normalised tf × idf row; all zeros when no token is known.
    pub fn transform(&self, text: &str) -> Vec<f64> {
        let mut row = vec![0.0; self.len()];
        for t in tokenize(text) {
            if let Some(&i) = self.vocabulary.get(&t) {
                row[i] += 1.0;
            }
        }
        for (v, idf) in row.iter_mut().zip(&self.idf) {
            *v *= idf;
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|v| *v /= norm);
        }
        row
    }
}
