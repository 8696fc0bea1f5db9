//! A generated corpus whose design-related sentences are separable by
//! vocabulary and skewed towards the description and comment openers.

use chrono::{Duration, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::annotations::{AnnotatedSentence, SentenceLabel};
use crate::corpus::{Comment, IssueLog};

pub const SENTENCES_PER_ISSUE: usize = 10;
const DESCRIPTION_SENTENCES: usize = 3;
const COMMENTS: usize = 3;
const SENTENCES_PER_COMMENT: usize = 2;

const SUBJECTS: [&str; 3] = ["We", "I", "You"];
const MODALS: [&str; 3] = ["should", "could", "can"];
const VERBS: [&str; 6] = ["propose", "implement", "introduce", "refactor", "replace", "add"];
const NOUNS: [&str; 6] = ["cache", "buffer", "index", "scheduler", "pool", "queue"];
const ADJECTIVES: [&str; 4] = ["bounded", "lazy", "shared", "dedicated"];
const OPENERS: [&str; 6] = ["Thanks for", "I will check", "Any update on", "Pinging again about", "Nice catch on", "Sorry for missing"];
const OBJECTS: [&str; 5] = ["the report", "this ticket", "the build", "the release notes", "this tomorrow"];
const COMPONENTS: [&str; 4] = ["parser", "checkpoint", "network", "storage"];
const AUTHORS: [&str; 3] = ["alice", "bob", "carol"];

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub issues: Vec<IssueLog>,
    /// Every sentence, in document order. The first design-related sentence
    /// of an issue is its solution; later ones form one argument group.
    pub annotations: Vec<AnnotatedSentence>,
}

fn design_sentence(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} {} {} a {} {} for the {}.",
        SUBJECTS.choose(rng).unwrap(),
        MODALS.choose(rng).unwrap(),
        VERBS.choose(rng).unwrap(),
        ADJECTIVES.choose(rng).unwrap(),
        NOUNS.choose(rng).unwrap(),
        COMPONENTS.choose(rng).unwrap()
    )
}

fn chatter_sentence(rng: &mut ChaCha8Rng) -> String {
    format!("{} {}.", OPENERS.choose(rng).unwrap(), OBJECTS.choose(rng).unwrap())
}

/// `issues` issues of [`SENTENCES_PER_ISSUE`] sentences each, all in
/// project `SYN`.
pub fn synthetic_corpus(issues: usize, seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = Utc.with_ymd_and_hms(2021, 3, 1, 9, 0, 0).unwrap();
    let mut out = SyntheticCorpus { issues: Vec::new(), annotations: Vec::new() };
    for n in 0..issues {
        let key = format!("SYN-{}", n + 1);
        let summary = format!("Slow {} under load", COMPONENTS.choose(&mut rng).unwrap());
        let mut rows: Vec<(String, String, bool)> = vec![("sum-s0".into(), summary.clone(), false)];
        let mut sentence = |rng: &mut ChaCha8Rng, id: String, p_design: f64| {
            let design = rng.random_bool(p_design);
            let text = if design { design_sentence(rng) } else { chatter_sentence(rng) };
            rows.push((id, text.clone(), design));
            text
        };
        let description: Vec<String> =
            (0..DESCRIPTION_SENTENCES).map(|j| sentence(&mut rng, format!("d-s{j}"), 0.7)).collect();
        let comments: Vec<Comment> = (0..COMMENTS)
            .map(|k| {
                let body: Vec<String> = (0..SENTENCES_PER_COMMENT)
                    .map(|j| sentence(&mut rng, format!("c{k}-s{j}"), if j == 0 { 0.5 } else { 0.15 }))
                    .collect();
                Comment {
                    index: k,
                    author: AUTHORS[(k + 1) % AUTHORS.len()].to_owned(),
                    timestamp: base + Duration::hours((n * 24 + k + 1) as i64),
                    body: body.join(" "),
                }
            })
            .collect();
        out.issues.push(IssueLog {
            key: key.clone(),
            project: "SYN".into(),
            summary,
            description: description.join(" "),
            reporter: AUTHORS[0].to_owned(),
            created: Some(base + Duration::hours((n * 24) as i64)),
            comments,
        });
        let mut solution_seen = false;
        for (id, text, design) in rows {
            let (label, rationale_id, argument_group_id) = match (design, solution_seen) {
                (false, _) => (SentenceLabel::Unrelated, None, None),
                (true, false) => (SentenceLabel::Solution, Some("r1".to_owned()), None),
                (true, true) => (SentenceLabel::Argument, Some("r1".to_owned()), Some("r1-a1".to_owned())),
            };
            solution_seen |= design;
            out.annotations.push(AnnotatedSentence { issue: key.clone(), sentence_id: id, text, label, rationale_id, argument_group_id });
        }
    }
    out
}
