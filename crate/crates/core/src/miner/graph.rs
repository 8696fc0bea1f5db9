use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::MinerError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub global_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Edge {
    Supporting { argument: String, solution: String },
    Complementary { a: String, b: String },
}

/// Typed relations over design-related sentences. Absent pairs are
/// unrelated; each unordered pair carries at most one edge.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationGraph {
    nodes: Vec<GraphNode>,
    edges: Vec<Edge>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    #[serde(skip)]
    pairs: BTreeMap<(usize, usize), usize>,
}

impl RelationGraph {
    /// Nodes are kept in ascending global index order.
    pub fn new(mut nodes: Vec<GraphNode>) -> Result<Self, MinerError> {
        nodes.sort_by_key(|n| n.global_index);
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(MinerError::InvalidGraph(format!("node {} listed twice", n.id)));
            }
            if i > 0 && nodes[i - 1].global_index == n.global_index {
                return Err(MinerError::InvalidGraph(format!("global index {} used twice", n.global_index)));
            }
        }
        Ok(Self { nodes, edges: Vec::new(), index, pairs: BTreeMap::new() })
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Position of `id` in [`Self::nodes`].
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn global_index(&self, id: &str) -> Option<usize> {
        self.position(id).map(|i| self.nodes[i].global_index)
    }

    pub fn edge_between(&self, a: &str, b: &str) -> Option<&Edge> {
        let (x, y) = (self.position(a)?, self.position(b)?);
        self.pairs.get(&(x.min(y), x.max(y))).map(|&e| &self.edges[e])
    }

    fn endpoints(&self, a: &str, b: &str) -> Result<(usize, usize), MinerError> {
        let x = self.position(a).ok_or_else(|| MinerError::InvalidGraph(format!("unknown node {a}")))?;
        let y = self.position(b).ok_or_else(|| MinerError::InvalidGraph(format!("unknown node {b}")))?;
        if x == y {
            return Err(MinerError::InvalidGraph(format!("self edge on {a}")));
        }
        let key = (x.min(y), x.max(y));
        if self.pairs.contains_key(&key) {
            return Err(MinerError::InvalidGraph(format!("second edge between {a} and {b}")));
        }
        Ok(key)
    }

    pub fn add_supporting(&mut self, argument: &str, solution: &str) -> Result<(), MinerError> {
        let key = self.endpoints(argument, solution)?;
        self.pairs.insert(key, self.edges.len());
        self.edges.push(Edge::Supporting { argument: argument.to_owned(), solution: solution.to_owned() });
        Ok(())
    }

    pub fn add_complementary(&mut self, a: &str, b: &str) -> Result<(), MinerError> {
        let key = self.endpoints(a, b)?;
        self.pairs.insert(key, self.edges.len());
        self.edges.push(Edge::Complementary { a: a.to_owned(), b: b.to_owned() });
        Ok(())
    }

    pub fn add(&mut self, edge: Edge) -> Result<(), MinerError> {
        match edge {
            Edge::Supporting { argument, solution } => self.add_supporting(&argument, &solution),
            Edge::Complementary { a, b } => self.add_complementary(&a, &b),
        }
    }

    /// Rebuilds lookup tables after deserialisation and re-checks invariants.
    pub fn reindexed(self) -> Result<Self, MinerError> {
        let mut g = Self::new(self.nodes)?;
        for e in self.edges {
            g.add(e)?;
        }
        Ok(g)
    }
}
