//! Text cleaning applied to every summary, description and comment body
//! before segmentation.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Literal that replaces each code block.
pub const CODE_TOKEN: &str = "[code]";
/// Literal that replaces each URL.
pub const URL_TOKEN: &str = "[URL]";

static CODE_BLOCK: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?s)\{code(?::[^}\n]*)?\}.*?(?:\{code\}|\z)|\{noformat\}.*?(?:\{noformat\}|\z)|```.*?(?:```|\z)",
    )
    .expect("code regex")
});

static QUOTE_BLOCK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)\{quote\}.*?(?:\{quote\}|\z)").expect("quote regex"));

static QUOTE_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?m)^[ \t]*>[^\n]*(?:\n|\z)").expect("quote line regex"));

/// Scheme-prefixed token run. Trailing sentence punctuation and closing
/// brackets are left outside the match.
pub static URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)\b(?:https?|ftp)://[^\s\[\]<>"|]*[^\s\[\]<>"|.,;:!?)'}]"#).expect("url regex")
});

/// Character repertoire kept by the unencodable-character filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Charset {
    /// Printable ASCII plus tab and line breaks.
    Ascii,
    /// ASCII, Latin-1 supplement, Latin Extended-A/B and general punctuation.
    #[default]
    Western,
}

impl Charset {
    pub fn allows(self, c: char) -> bool {
        match c {
            '\t' | '\n' | '\r' | ' '..='~' => true,
            _ if self == Charset::Ascii => false,
            '\u{00A0}'..='\u{024F}' | '\u{2000}'..='\u{206F}' => true,
            _ => false,
        }
    }
}

/// Cleans with the default charset.
pub fn clean_text(text: &str) -> String {
    clean_text_with(text, Charset::default())
}

/// Replaces code blocks and URLs with their placeholder tokens, deletes
/// quoted references, and drops characters outside `charset`.
///
/// Deletions can expose new matches (a quote marker brought to a line
/// start, a URL split by a dropped emoji), so passes repeat until the text
/// stops changing.
pub fn clean_text_with(text: &str, charset: Charset) -> String {
    let mut current = text.to_owned();
    // Every changing pass strictly removes a delimiter or shrinks the text,
    // so this terminates well before the cap.
    for _ in 0..16 {
        let next = clean_pass(&current, charset);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn clean_pass(text: &str, charset: Charset) -> String {
    let text = CODE_BLOCK.replace_all(text, CODE_TOKEN);
    let text = QUOTE_BLOCK.replace_all(&text, "");
    let text = QUOTE_LINE.replace_all(&text, "");
    let text = URL.replace_all(&text, URL_TOKEN);
    text.chars().filter(|&c| charset.allows(c)).collect()
}

/// Same as the code-fence delimiters recognised by [`clean_text`].
pub fn contains_code_delimiter(text: &str) -> bool {
    text.contains("{code") || text.contains("{noformat}") || text.contains("```")
}
