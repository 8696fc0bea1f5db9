use serde::{Deserialize, Serialize};

/// The 14 keyword flags. Word flags match whole words case-insensitively;
/// `qmark` and `bang` are character-presence flags.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordFlags {
    pub what: bool,
    pub why: bool,
    pub when: bool,
    pub who: bool,
    pub which: bool,
    pub how: bool,
    pub modal_should_shall: bool,
    pub modal_can_could: bool,
    pub modal_may_might: bool,
    pub qmark: bool,
    pub bang: bool,
    pub greeting: bool,
    pub causal: bool,
    pub transitional: bool,
}

const GREETING: &[&str] = &["hi", "hello", "bye", "thanks", "thx", "thank"];
const CAUSAL: &[&str] = &["so", "therefore", "then"];
const TRANSITIONAL: &[&str] = &["but", "yet", "however"];

impl KeywordFlags {
    pub const COUNT: usize = 14;

    pub fn to_array(self) -> [bool; Self::COUNT] {
        [
            self.what,
            self.why,
            self.when,
            self.who,
            self.which,
            self.how,
            self.modal_should_shall,
            self.modal_can_could,
            self.modal_may_might,
            self.qmark,
            self.bang,
            self.greeting,
            self.causal,
            self.transitional,
        ]
    }

    pub fn count_set(self) -> usize {
        self.to_array().iter().filter(|b| **b).count()
    }
}

pub fn keyword_flags(sentence: &str) -> KeywordFlags {
    let words: Vec<String> = sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect();
    let has = |w: &str| words.iter().any(|x| x == w);
    let any = |list: &[&str]| list.iter().any(|w| has(w));
    KeywordFlags {
        what: has("what"),
        why: has("why"),
        when: has("when"),
        who: has("who"),
        which: has("which"),
        how: has("how"),
        modal_should_shall: any(&["should", "shall"]),
        modal_can_could: any(&["can", "could"]),
        modal_may_might: any(&["may", "might"]),
        qmark: sentence.contains('?'),
        bang: sentence.contains('!'),
        greeting: any(GREETING),
        causal: any(CAUSAL),
        transitional: any(TRANSITIONAL),
    }
}
