//! Mining design rationales from issue-tracker discussions.
//!
//! The pipeline has three phases. Sentence extraction classifies every
//! sentence of an issue as design-related or not, from a cloze-prompt
//! polarity vector concatenated with 29 hand-crafted features. Sentence
//! pairing labels each pair of extracted sentences as supporting,
//! complementary or unrelated. Construction groups the resulting relation
//! graph into solutions and argument groups.

pub mod backends;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod miner;
pub mod par;
pub mod prompts;
