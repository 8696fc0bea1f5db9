//! Rationale construction: role assignment, complementary grouping, and
//! argument attachment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::graph::{Edge, RelationGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Solution,
    Argument,
}

/// One solution group with the argument groups attached to it. Ids are
/// ordered by global index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignRationale {
    pub issue_key: String,
    pub solution: Vec<String>,
    pub arguments: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Construction {
    pub rationales: Vec<DesignRationale>,
    /// Argument groups with no Supporting edge into any solution group.
    pub dropped_groups: Vec<Vec<String>>,
    /// Complementary edges joining a solution-role and an argument-role node.
    pub ignored_edges: Vec<(String, String)>,
    /// Supporting edges whose target did not take the solution role.
    pub dangling_supports: Vec<(String, String)>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let parent = self.0[x];
        if parent == x {
            return x;
        }
        let root = self.find(parent);
        self.0[x] = root;
        root
    }

    /// Keeps the smaller index as root so roots are group minima.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Role of every node, by node position.
pub fn assign_roles(g: &RelationGraph) -> Vec<Role> {
    let n = g.nodes().len();
    let (mut incoming, mut outgoing) = (vec![0usize; n], vec![0usize; n]);
    for e in g.edges() {
        if let Edge::Supporting { argument, solution } = e {
            outgoing[g.position(argument).expect("edge endpoints exist")] += 1;
            incoming[g.position(solution).expect("edge endpoints exist")] += 1;
        }
    }
    (0..n)
        .map(|i| if outgoing[i] > incoming[i] { Role::Argument } else { Role::Solution })
        .collect()
}

fn groups(uf: &mut UnionFind, members: impl Iterator<Item = usize>) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in members {
        out.entry(uf.find(i)).or_default().push(i);
    }
    out
}

pub fn construct_rationales(g: &RelationGraph, issue_key: &str) -> Vec<DesignRationale> {
    construct_detailed(g, issue_key).rationales
}

pub fn construct_detailed(g: &RelationGraph, issue_key: &str) -> Construction {
    let nodes = g.nodes();
    let roles = assign_roles(g);
    let pos = |id: &str| g.position(id).expect("edge endpoints exist");
    let mut out = Construction::default();

    let mut uf = UnionFind::new(nodes.len());
    for e in g.edges() {
        if let Edge::Complementary { a, b } = e {
            let (x, y) = (pos(a), pos(b));
            if roles[x] == roles[y] {
                uf.union(x, y);
            } else {
                log::info!("{issue_key}: ignoring complementary edge across roles {a} / {b}");
                out.ignored_edges.push((a.clone(), b.clone()));
            }
        }
    }

    // Node positions follow global index, so BTreeMap order by root (the
    // group minimum) is order by smallest global index.
    let solution_groups = groups(&mut uf, (0..nodes.len()).filter(|&i| roles[i] == Role::Solution));
    let argument_groups = groups(&mut uf, (0..nodes.len()).filter(|&i| roles[i] == Role::Argument));
    let slot: BTreeMap<usize, usize> = solution_groups.keys().enumerate().map(|(k, root)| (*root, k)).collect();

    let mut attached: Vec<Vec<Vec<usize>>> = vec![Vec::new(); solution_groups.len()];
    for members in argument_groups.values() {
        let mut votes = vec![0usize; solution_groups.len()];
        for e in g.edges() {
            if let Edge::Supporting { argument, solution } = e {
                let (a, s) = (pos(argument), pos(solution));
                if !members.contains(&a) {
                    continue;
                }
                if roles[s] == Role::Solution {
                    votes[slot[&uf.find(s)]] += 1;
                } else {
                    out.dangling_supports.push((argument.clone(), solution.clone()));
                }
            }
        }
        // Slots are ordered by smallest global index, so the first maximum
        // is the tie winner.
        let best = votes.iter().enumerate().filter(|(_, v)| **v > 0).fold(None, |acc: Option<(usize, usize)>, (k, v)| {
            match acc {
                Some((_, bv)) if bv >= *v => acc,
                _ => Some((k, *v)),
            }
        });
        match best {
            Some((k, _)) => attached[k].push(members.clone()),
            None => {
                let ids: Vec<String> = members.iter().map(|&i| nodes[i].id.clone()).collect();
                log::info!("{issue_key}: dropping argument group {ids:?} with no solution to support");
                out.dropped_groups.push(ids);
            }
        }
    }
    for (a, s) in &out.dangling_supports {
        log::info!("{issue_key}: supporting edge {a} -> {s} targets a non-solution");
    }

    let ids = |group: &[usize]| group.iter().map(|&i| nodes[i].id.clone()).collect::<Vec<_>>();
    out.rationales = solution_groups
        .values()
        .zip(attached)
        .map(|(solution, args)| DesignRationale {
            issue_key: issue_key.to_owned(),
            solution: ids(solution),
            arguments: args.iter().map(|a| ids(a)).collect(),
        })
        .collect();
    out
}
