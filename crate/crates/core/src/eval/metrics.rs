//! Rationale-, sentence- and extraction-level precision/recall/F1.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::miner::DesignRationale;
use crate::par;

/// Raw counts behind one precision/recall pair. Precision is
/// `tp_pred / predicted`; recall is `tp_gold / gold`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub predicted: usize,
    pub gold: usize,
    pub tp_pred: usize,
    pub tp_gold: usize,
}

impl Tally {
    pub fn add(self, other: Tally) -> Tally {
        Tally {
            predicted: self.predicted + other.predicted,
            gold: self.gold + other.gold,
            tp_pred: self.tp_pred + other.tp_pred,
            tp_gold: self.tp_gold + other.tp_gold,
        }
    }

    /// Nothing predicted and nothing to find scores 1 across the board;
    /// otherwise an empty denominator gives 0.
    pub fn score(self) -> Score {
        let (precision, recall) = if self.predicted == 0 && self.gold == 0 {
            (1.0, 1.0)
        } else {
            let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
            (ratio(self.tp_pred, self.predicted), ratio(self.tp_gold, self.gold))
        };
        Score {
            precision,
            recall,
            f1: f1(precision, recall),
            tp: self.tp_pred,
            fp: self.predicted - self.tp_pred,
            fn_: self.gold - self.tp_gold,
        }
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn overlap(a: &[String], b: &[String]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

/// A prediction is a hit when it shares a solution sentence with any gold
/// rationale; recall counts gold rationales hit by any prediction.
pub fn rationale_tally(pred: &[DesignRationale], gold: &[DesignRationale]) -> Tally {
    let hits = |r: &DesignRationale, others: &[DesignRationale]| others.iter().any(|o| overlap(&r.solution, &o.solution) > 0);
    Tally {
        predicted: pred.len(),
        gold: gold.len(),
        tp_pred: pred.iter().filter(|p| hits(p, gold)).count(),
        tp_gold: gold.iter().filter(|g| hits(g, pred)).count(),
    }
}

pub fn eval_rationales(pred: &[DesignRationale], gold: &[DesignRationale]) -> Score {
    rationale_tally(pred, gold).score()
}

/// Gold rationale with the largest solution overlap; ties go to the one
/// listed first (gold lists are ordered by first solution sentence).
pub fn map_to_gold(pred: &DesignRationale, gold: &[DesignRationale]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, g) in gold.iter().enumerate() {
        let o = overlap(&pred.solution, &g.solution);
        if o > 0 && best.is_none_or(|(_, bo)| o > bo) {
            best = Some((i, o));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceTallies {
    pub solution: Tally,
    pub argument: Tally,
}

impl SentenceTallies {
    pub fn add(self, o: SentenceTallies) -> Self {
        Self { solution: self.solution.add(o.solution), argument: self.argument.add(o.argument) }
    }
}

/// A predicted sentence is a hit when the gold rationale its prediction maps
/// to holds it in the same category.
pub fn sentence_tallies(pred: &[DesignRationale], gold: &[DesignRationale]) -> SentenceTallies {
    let mut sol_hits: BTreeSet<&str> = BTreeSet::new();
    let mut arg_hits: BTreeSet<&str> = BTreeSet::new();
    let (mut sol, mut arg) = (Tally::default(), Tally::default());
    for p in pred {
        let mapped = map_to_gold(p, gold).map(|i| &gold[i]);
        sol.predicted += p.solution.len();
        for s in &p.solution {
            if let Some(g) = mapped
                && g.solution.contains(s)
            {
                sol.tp_pred += 1;
                sol_hits.insert(s);
            }
        }
        for s in p.arguments.iter().flatten() {
            arg.predicted += 1;
            if let Some(g) = mapped
                && g.arguments.iter().flatten().any(|x| x == s)
            {
                arg.tp_pred += 1;
                arg_hits.insert(s);
            }
        }
    }
    let gold_sol: BTreeSet<&str> = gold.iter().flat_map(|g| g.solution.iter().map(String::as_str)).collect();
    let gold_arg: BTreeSet<&str> = gold.iter().flat_map(|g| g.arguments.iter().flatten().map(String::as_str)).collect();
    sol.gold = gold_sol.len();
    sol.tp_gold = sol_hits.len();
    arg.gold = gold_arg.len();
    arg.tp_gold = arg_hits.len();
    SentenceTallies { solution: sol, argument: arg }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceScores {
    pub solution: Score,
    pub argument: Score,
}

pub fn eval_sentences(pred: &[DesignRationale], gold: &[DesignRationale]) -> SentenceScores {
    let t = sentence_tallies(pred, gold);
    SentenceScores { solution: t.solution.score(), argument: t.argument.score() }
}

/// Binary scores over the design-related class.
pub fn dsea_tally<T: Ord>(pred: &BTreeSet<T>, gold: &BTreeSet<T>) -> Tally {
    let tp = pred.intersection(gold).count();
    Tally { predicted: pred.len(), gold: gold.len(), tp_pred: tp, tp_gold: tp }
}

pub fn eval_dsea<T: Ord>(pred: &BTreeSet<T>, gold: &BTreeSet<T>) -> Score {
    dsea_tally(pred, gold).score()
}

/// Corpus-level report; counts are summed over issues before dividing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub issues: usize,
    pub rationale: Score,
    pub solution: Score,
    pub argument: Score,
}

pub fn evaluate_corpus(
    pred: &BTreeMap<String, Vec<DesignRationale>>,
    gold: &BTreeMap<String, Vec<DesignRationale>>,
) -> EvalReport {
    let keys: Vec<&String> = pred.keys().chain(gold.keys()).collect::<BTreeSet<_>>().into_iter().collect();
    let empty = Vec::new();
    let per_issue = par::map(&keys, |k| {
        let p = pred.get(*k).unwrap_or(&empty);
        let g = gold.get(*k).unwrap_or(&empty);
        (rationale_tally(p, g), sentence_tallies(p, g))
    });
    let (r, s) = per_issue
        .into_iter()
        .fold((Tally::default(), SentenceTallies::default()), |(ra, sa), (rb, sb)| (ra.add(rb), sa.add(sb)));
    EvalReport { issues: keys.len(), rationale: r.score(), solution: s.solution.score(), argument: s.argument.score() }
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("issues: {}\n", self.issues);
        out.push_str(&score_table(&[("rationale", &self.rationale), ("solution", &self.solution), ("argument", &self.argument)]));
        out
    }
}

/// Aligned plain-text table of named scores.
pub fn score_table(rows: &[(&str, &Score)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("level".len());
    let mut out = format!("{:<width$}  {:>9}  {:>6}  {:>6}  {:>5}  {:>5}  {:>5}\n", "level", "precision", "recall", "f1", "tp", "fp", "fn");
    for (name, s) in rows {
        out.push_str(&format!(
            "{name:<width$}  {:>9.4}  {:>6.4}  {:>6.4}  {:>5}  {:>5}  {:>5}\n",
            s.precision, s.recall, s.f1, s.tp, s.fp, s.fn_
        ));
    }
    out
}
