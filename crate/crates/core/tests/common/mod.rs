//! Shared helpers for the integration tests: fixture paths, random
//! generators, and brute-force oracles written without the library's
//! grouping or metric code.

#![allow(dead_code)]

pub mod stub;

use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::{Duration, TimeZone, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rationale_miner::corpus::{Comment, IssueLog};
use rationale_miner::miner::{DesignRationale, Edge, GraphNode, RelationGraph};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WORDS: [&str; 24] = [
    "cache", "should", "why", "However", "thanks", "great", "terrible", "not", "the", "buffer", "we", "could",
    "[code]", "[URL]", "so", "which", "memory", "heap", "really", "GOOD", "never", "hello", "propose", "index",
];

pub fn random_sentence(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..12);
    let mut words: Vec<&str> = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect();
    words[0] = words[0].trim_start_matches('[');
    let end = *["." , "!", "?", "."].choose(rng).unwrap();
    format!("{}{end}", words.join(" "))
}

fn random_text(rng: &mut ChaCha8Rng, max: usize) -> String {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| random_sentence(rng)).collect::<Vec<_>>().join(" ")
}

/// An issue with random text, 0–5 comments and 1–3 authors.
pub fn random_issue(rng: &mut ChaCha8Rng, n: usize) -> IssueLog {
    let authors = ["ann", "ben", "cho"];
    let base = Utc.with_ymd_and_hms(2022, 5, 1, 0, 0, 0).unwrap();
    let comments = (0..rng.random_range(0..6))
        .map(|k| Comment {
            index: k,
            author: authors.choose(rng).unwrap().to_string(),
            timestamp: base + Duration::minutes(k as i64 + 1),
            body: random_text(rng, 4),
        })
        .collect();
    IssueLog {
        key: format!("RND-{n}"),
        project: "RND".into(),
        summary: format!("Summary {n} {}", WORDS.choose(rng).unwrap()),
        description: random_text(rng, 4),
        reporter: authors[0].into(),
        created: Some(base),
        comments,
    }
}

/// Random graph over at most `max_nodes` nodes with scattered global indices.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> RelationGraph {
    let n = rng.random_range(1..=max_nodes);
    let mut gis: Vec<usize> = (0..40).collect();
    gis.shuffle(rng);
    let nodes: Vec<GraphNode> = gis[..n].iter().map(|&g| GraphNode { id: format!("n{g}"), global_index: g }).collect();
    let mut g = RelationGraph::new(nodes.clone()).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&nodes[i].id, &nodes[j].id);
            match rng.random_range(0..8) {
                0 | 1 => g.add(Edge::Supporting { argument: a.clone(), solution: b.clone() }).unwrap(),
                2 | 3 => g.add(Edge::Supporting { argument: b.clone(), solution: a.clone() }).unwrap(),
                4 | 5 => g.add(Edge::Complementary { a: a.clone(), b: b.clone() }).unwrap(),
                _ => {}
            }
        }
    }
    g
}

/// Literal application of the construction rules by exhaustive scanning.
pub fn oracle_construct(g: &RelationGraph, issue: &str) -> Vec<DesignRationale> {
    let gi = |id: &str| g.nodes().iter().find(|n| n.id == id).unwrap().global_index;
    let supports: Vec<(&str, &str)> = g
        .edges()
        .iter()
        .filter_map(|e| match e {
            Edge::Supporting { argument, solution } => Some((argument.as_str(), solution.as_str())),
            _ => None,
        })
        .collect();
    let complements: Vec<(&str, &str)> = g
        .edges()
        .iter()
        .filter_map(|e| match e {
            Edge::Complementary { a, b } => Some((a.as_str(), b.as_str())),
            _ => None,
        })
        .collect();

    // (1) roles
    let is_solution = |id: &str| {
        let incoming = supports.iter().filter(|(_, s)| *s == id).count();
        let outgoing = supports.iter().filter(|(a, _)| *a == id).count();
        outgoing <= incoming
    };
    let solutions: Vec<&str> = g.nodes().iter().map(|n| n.id.as_str()).filter(|id| is_solution(id)).collect();
    let arguments: Vec<&str> = g.nodes().iter().map(|n| n.id.as_str()).filter(|id| !is_solution(id)).collect();

    // (2)/(3) grouping: merge sets until no complementary edge joins two of them
    let components = |members: &[&str]| -> Vec<Vec<String>> {
        let mut sets: Vec<BTreeSet<&str>> = members.iter().map(|m| BTreeSet::from([*m])).collect();
        loop {
            let mut merged = false;
            'scan: for i in 0..sets.len() {
                for j in 0..sets.len() {
                    if i == j {
                        continue;
                    }
                    let joined = complements.iter().any(|(a, b)| {
                        (sets[i].contains(a) && sets[j].contains(b)) || (sets[i].contains(b) && sets[j].contains(a))
                    });
                    if joined {
                        let other = sets.remove(j.max(i));
                        sets[j.min(i)].extend(other);
                        merged = true;
                        break 'scan;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        let mut out: Vec<Vec<String>> = sets
            .into_iter()
            .map(|s| {
                let mut v: Vec<String> = s.into_iter().map(String::from).collect();
                v.sort_by_key(|id| gi(id));
                v
            })
            .collect();
        out.sort_by_key(|v| gi(&v[0]));
        out
    };
    let solution_groups = components(&solutions);
    let argument_groups = components(&arguments);

    // (4) attachment
    let mut attached: Vec<Vec<Vec<String>>> = vec![Vec::new(); solution_groups.len()];
    for group in argument_groups {
        let mut best: Option<(usize, usize)> = None;
        for (k, sg) in solution_groups.iter().enumerate() {
            let votes = supports
                .iter()
                .filter(|(a, s)| group.iter().any(|m| m == a) && sg.iter().any(|m| m == s))
                .count();
            if votes == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bk, bv)) => votes > bv || (votes == bv && gi(&sg[0]) < gi(&solution_groups[bk][0])),
            };
            if better {
                best = Some((k, votes));
            }
        }
        if let Some((k, _)) = best {
            attached[k].push(group);
        }
    }
    solution_groups
        .into_iter()
        .zip(attached)
        .map(|(solution, arguments)| DesignRationale { issue_key: issue.into(), solution, arguments })
        .collect()
}

/// Random rationales over ids `x0..x{universe}` with disjoint solutions and
/// no sentence used twice.
pub fn random_rationales(rng: &mut ChaCha8Rng, universe: usize, max: usize) -> Vec<DesignRationale> {
    let mut ids: Vec<String> = (0..universe).map(|i| format!("x{i}")).collect();
    ids.shuffle(rng);
    let mut pool = ids.into_iter();
    let mut out = Vec::new();
    for _ in 0..rng.random_range(0..=max) {
        let take = |rng: &mut ChaCha8Rng, pool: &mut std::vec::IntoIter<String>, n: usize| -> Vec<String> {
            let k = rng.random_range(1..=n);
            pool.by_ref().take(k).collect()
        };
        let solution = take(rng, &mut pool, 3);
        if solution.is_empty() {
            break;
        }
        let arguments: Vec<Vec<String>> = (0..rng.random_range(0..3))
            .map(|_| take(rng, &mut pool, 2))
            .filter(|g| !g.is_empty())
            .collect();
        out.push(DesignRationale { issue_key: "R-1".into(), solution, arguments });
    }
    out
}

/// (precision, recall, f1) with the empty conventions used by the metrics.
pub fn prf(tp_pred: usize, predicted: usize, tp_gold: usize, gold: usize) -> (f64, f64, f64) {
    if predicted == 0 && gold == 0 {
        return (1.0, 1.0, 1.0);
    }
    let p = if predicted == 0 { 0.0 } else { tp_pred as f64 / predicted as f64 };
    let r = if gold == 0 { 0.0 } else { tp_gold as f64 / gold as f64 };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

fn shares_solution(a: &DesignRationale, b: &DesignRationale) -> bool {
    a.solution.iter().any(|x| b.solution.iter().any(|y| x == y))
}

pub fn oracle_rationale_prf(pred: &[DesignRationale], gold: &[DesignRationale]) -> (f64, f64, f64) {
    let mut tp = 0;
    for p in pred {
        if gold.iter().any(|g| shares_solution(p, g)) {
            tp += 1;
        }
    }
    let mut found = 0;
    for g in gold {
        if pred.iter().any(|p| shares_solution(p, g)) {
            found += 1;
        }
    }
    prf(tp, pred.len(), found, gold.len())
}

/// ((solution p, r, f1), (argument p, r, f1)).
pub fn oracle_sentence_prf(pred: &[DesignRationale], gold: &[DesignRationale]) -> ((f64, f64, f64), (f64, f64, f64)) {
    let mut sol = (0, 0, BTreeSet::new());
    let mut arg = (0, 0, BTreeSet::new());
    for p in pred {
        // best gold by overlap; first listed wins ties; zero overlap maps nowhere
        let mut target: Option<&DesignRationale> = None;
        let mut best = 0;
        for g in gold {
            let o = p.solution.iter().filter(|x| g.solution.contains(x)).count();
            if o > best {
                best = o;
                target = Some(g);
            }
        }
        for s in &p.solution {
            sol.1 += 1;
            if target.is_some_and(|g| g.solution.contains(s)) {
                sol.0 += 1;
                sol.2.insert(s.clone());
            }
        }
        for group in &p.arguments {
            for s in group {
                arg.1 += 1;
                if target.is_some_and(|g| g.arguments.iter().any(|ga| ga.contains(s))) {
                    arg.0 += 1;
                    arg.2.insert(s.clone());
                }
            }
        }
    }
    let gold_sol: BTreeSet<&String> = gold.iter().flat_map(|g| &g.solution).collect();
    let gold_arg: BTreeSet<&String> = gold.iter().flat_map(|g| g.arguments.iter().flatten()).collect();
    (
        prf(sol.0, sol.1, sol.2.len(), gold_sol.len()),
        prf(arg.0, arg.1, arg.2.len(), gold_arg.len()),
    )
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
