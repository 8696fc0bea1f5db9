//! Cloze prompt for sentence extraction, instruction prompt for sentence
//! pairing, and the token budgets that bound both.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::features::PairFeatures;

pub const MASK_TOKEN: &str = "[MASK]";
pub const LABEL_SLOT: &str = "[LABEL]";

/// Fixed description between `{sentence}` and `{summary}`.
pub const DSEA_FIXED_DESCRIPTION: &str = "is [MASK] related to the issue:";
/// Length of the fixed description in backbone tokens; one more is
/// reserved for the leading classifier token.
pub const DSEA_FIXED_TOKENS: usize = 7;
pub const DSEA_RESERVED_TOKENS: usize = DSEA_FIXED_TOKENS + 1;

pub const DSPA_INSTRUCTION: &str = "The following two sentences may be argument or solution for an issue. \
Is their relationship argument-solution supporting, complementary, or unrelated?";

pub const DSEA_DEFAULT_MAX: usize = 384;
pub const DSPA_DEFAULT_MAX: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("token budget exhausted: {available} tokens left for each sentence")]
    BudgetExhausted { available: i64 },
    #[error("max sequence length must exceed 16 (got {0})")]
    InvalidBudget(usize),
    #[error("issue summary is empty")]
    EmptySummary,
    #[error("cannot pair sentence {0} with itself")]
    SameSentence(String),
}

/// Counts tokens in a text span.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> usize;
}

/// One token per whitespace-delimited word.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceCounter;

impl TokenCounter for WhitespaceCounter {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

/// Word-piece-free approximation of a BERT basic tokenizer: every
/// punctuation character is its own token, bracketed placeholders such as
/// `[MASK]` or `[URL]` stay atomic.
#[derive(Debug, Clone, Copy, Default)]
pub struct PunctuationCounter;

impl TokenCounter for PunctuationCounter {
    fn count(&self, text: &str) -> usize {
        let mut n = 0;
        for word in text.split_whitespace() {
            let mut rest = word;
            while !rest.is_empty() {
                if let Some(p) = ["[MASK]", "[LABEL]", "[code]", "[URL]"].iter().find(|p| rest.starts_with(**p)) {
                    n += 1;
                    rest = &rest[p.len()..];
                    continue;
                }
                let c = rest.chars().next().expect("non-empty");
                if c.is_ascii_punctuation() {
                    n += 1;
                    rest = &rest[1..];
                } else {
                    n += 1;
                    let end = rest.find(|c: char| c.is_ascii_punctuation()).unwrap_or(rest.len());
                    rest = &rest[end..];
                }
            }
        }
        n
    }
}

/// Count-only tokenizer supplied by a backend.
#[derive(Clone)]
pub struct CallbackCounter(Arc<dyn Fn(&str) -> usize + Send + Sync>);

impl CallbackCounter {
    pub fn new(f: impl Fn(&str) -> usize + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
}

impl fmt::Debug for CallbackCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CallbackCounter")
    }
}

impl TokenCounter for CallbackCounter {
    fn count(&self, text: &str) -> usize {
        (self.0)(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBudget {
    max_sequence: usize,
}

impl TokenBudget {
    pub fn new(max_sequence: usize) -> Result<Self, PromptError> {
        if max_sequence <= 16 {
            return Err(PromptError::InvalidBudget(max_sequence));
        }
        Ok(Self { max_sequence })
    }

    pub fn dsea_default() -> Self {
        Self { max_sequence: DSEA_DEFAULT_MAX }
    }

    pub fn dspa_default() -> Self {
        Self { max_sequence: DSPA_DEFAULT_MAX }
    }

    pub fn max_sequence(self) -> usize {
        self.max_sequence
    }
}

/// Sentence cap for the cloze prompt: `max - summary_len - 8`.
pub fn dsea_sentence_cap(summary_len: usize, budget: TokenBudget) -> Result<usize, PromptError> {
    let available = budget.max_sequence as i64 - summary_len as i64 - DSEA_RESERVED_TOKENS as i64;
    if summary_len < 1 || available < 1 {
        return Err(PromptError::BudgetExhausted { available });
    }
    Ok(available as usize)
}

/// Keeps the leading tokens that fit the cloze-prompt cap.
pub fn truncate_dsea<T>(sentence: &[T], summary_len: usize, budget: TokenBudget) -> Result<&[T], PromptError> {
    let cap = dsea_sentence_cap(summary_len, budget)?;
    Ok(&sentence[..sentence.len().min(cap)])
}

/// Per-sentence cap for the pairing prompt: half the margin left by the
/// fixed template, rounded down.
pub fn dspa_sentence_cap(template_len: usize, budget: TokenBudget) -> Result<usize, PromptError> {
    let available = (budget.max_sequence as i64 - template_len as i64).div_euclid(2);
    if available < 1 {
        return Err(PromptError::BudgetExhausted { available });
    }
    Ok(available as usize)
}

/// Caps both sentences independently; a short sentence does not donate its
/// unused margin.
pub fn truncate_dspa<'a, 'b, T>(
    s1: &'a [T],
    s2: &'b [T],
    template_len: usize,
    budget: TokenBudget,
) -> Result<(&'a [T], &'b [T]), PromptError> {
    let cap = dspa_sentence_cap(template_len, budget)?;
    Ok((&s1[..s1.len().min(cap)], &s2[..s2.len().min(cap)]))
}

/// Longest whitespace-word prefix of `text` whose count is within `cap`.
fn truncate_text(text: &str, cap: usize, counter: &dyn TokenCounter) -> (String, usize) {
    let words: Vec<&str> = text.split_whitespace().collect();
    let full = words.join(" ");
    let n = counter.count(&full);
    if n <= cap {
        return (full, n);
    }
    let (mut lo, mut hi) = (0usize, words.len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if counter.count(&words[..mid].join(" ")) <= cap {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let kept = words[..lo].join(" ");
    let used = counter.count(&kept);
    (kept, used)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DseaPrompt {
    pub text: String,
    pub sentence_tokens_used: usize,
    pub summary_tokens_used: usize,
}

/// `"{sentence} is [MASK] related to the issue: {summary}"`, with the
/// sentence cut to its cap.
pub fn build_dsea_prompt(
    sentence: &str,
    summary: &str,
    budget: TokenBudget,
    counter: &dyn TokenCounter,
) -> Result<DseaPrompt, PromptError> {
    let summary = summary.split_whitespace().collect::<Vec<_>>().join(" ");
    if summary.is_empty() {
        return Err(PromptError::EmptySummary);
    }
    let summary_len = counter.count(&summary);
    let cap = dsea_sentence_cap(summary_len, budget)?;
    let (sentence, used) = truncate_text(sentence, cap, counter);
    let text = if sentence.is_empty() {
        format!("{DSEA_FIXED_DESCRIPTION} {summary}")
    } else {
        format!("{sentence} {DSEA_FIXED_DESCRIPTION} {summary}")
    };
    Ok(DseaPrompt {
        text,
        sentence_tokens_used: used,
        summary_tokens_used: summary_len,
    })
}

pub fn pair_feature_clause(pf: PairFeatures) -> String {
    let relation = if pf.in_same_comment { "in" } else { "not in" };
    format!(
        "Two sentences are {relation} the same comment and their distance is {}.",
        pf.distance
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DspaPrompt {
    pub instruction: String,
    /// Sentence lines followed by the pair-feature clause.
    pub input: String,
    pub response_slot: String,
    pub sentence1_tokens_used: usize,
    pub sentence2_tokens_used: usize,
    pub template_tokens: usize,
}

fn render_dspa(instruction: &str, input: &str, response: &str) -> String {
    format!("### Instruction:\n{instruction}\n### Input:\n{input}\n### Response:\n{response}")
}

fn dspa_input(s1: &str, s2: &str, clause: &str) -> String {
    format!("Sentence 1: {s1}\nSentence 2: {s2}\n{clause}")
}

impl DspaPrompt {
    /// Full layout, ending in the `[LABEL]` slot.
    pub fn render(&self) -> String {
        render_dspa(&self.instruction, &self.input, &self.response_slot)
    }

    /// The text sent for generation: the layout up to the response section.
    pub fn generation_prompt(&self) -> String {
        render_dspa(&self.instruction, &self.input, "")
    }
}

pub fn build_dspa_prompt(
    s1: &Sentence,
    s2: &Sentence,
    pf: PairFeatures,
    budget: TokenBudget,
    counter: &dyn TokenCounter,
) -> Result<DspaPrompt, PromptError> {
    if s1.issue_key == s2.issue_key && s1.id == s2.id {
        return Err(PromptError::SameSentence(s1.id.clone()));
    }
    let clause = pair_feature_clause(pf);
    let template_tokens = counter.count(&render_dspa(DSPA_INSTRUCTION, &dspa_input("", "", &clause), LABEL_SLOT));
    let cap = dspa_sentence_cap(template_tokens, budget)?;
    let (t1, used1) = truncate_text(&s1.text, cap, counter);
    let (t2, used2) = truncate_text(&s2.text, cap, counter);
    Ok(DspaPrompt {
        instruction: DSPA_INSTRUCTION.to_owned(),
        input: dspa_input(&t1, &t2, &clause),
        response_slot: LABEL_SLOT.to_owned(),
        sentence1_tokens_used: used1,
        sentence2_tokens_used: used2,
        template_tokens,
    })
}
