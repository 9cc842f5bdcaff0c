//! Graphs embedded in data space and the complexity measures defined on them.
//!
//! Nodes are dense ids `0..n`; each carries a position vector. Edges are
//! unordered pairs stored as `(lo, hi)` in insertion order. Removing a node
//! compacts the ids above it.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{dist2, norm2};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedGraph {
    dim: usize,
    positions: Vec<Vec<f64>>,
    edges: Vec<(usize, usize)>,
}

impl EmbeddedGraph {
    /// Builds a graph; rejects self-loops, duplicate edges, unknown ids and
    /// mixed dimensions. Connectivity is not enforced here.
    pub fn new(positions: Vec<Vec<f64>>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let dim = positions.first().map(Vec::len).ok_or(Error::TooFewNodes {
            needed: 1,
            found: 0,
        })?;
        let mut g = EmbeddedGraph {
            dim,
            positions: Vec::with_capacity(positions.len()),
            edges: Vec::with_capacity(edges.len()),
        };
        for p in positions {
            g.add_node(p)?;
        }
        for (a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// A simple path through `positions` in order.
    pub fn chain(positions: Vec<Vec<f64>>) -> Result<Self> {
        let edges = (1..positions.len()).map(|i| (i - 1, i)).collect();
        Self::new(positions, edges)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn position(&self, node: usize) -> &[f64] {
        &self.positions[node]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn set_position(&mut self, node: usize, pos: Vec<f64>) -> Result<()> {
        self.check_node(node)?;
        self.check_dim(&pos)?;
        self.positions[node] = pos;
        Ok(())
    }

    pub fn add_node(&mut self, pos: Vec<f64>) -> Result<usize> {
        self.check_dim(&pos)?;
        self.positions.push(pos);
        Ok(self.positions.len() - 1)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let n = self.node_count();
        if a == b || a >= n || b >= n {
            return Err(Error::InvalidEdge(a, b));
        }
        let e = (a.min(b), a.max(b));
        if self.edges.contains(&e) {
            return Err(Error::InvalidEdge(a, b));
        }
        self.edges.push(e);
        Ok(())
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> Result<()> {
        let e = (a.min(b), a.max(b));
        let idx = self
            .edges
            .iter()
            .position(|&x| x == e)
            .ok_or(Error::InvalidEdge(a, b))?;
        self.edges.remove(idx);
        Ok(())
    }

    /// Removes a node and its incident edges; ids above `node` shift down by one.
    pub fn remove_node(&mut self, node: usize) -> Result<()> {
        self.check_node(node)?;
        self.positions.remove(node);
        let shift = |v: usize| if v > node { v - 1 } else { v };
        self.edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != node && b != node)
            .map(|&(a, b)| (shift(a), shift(b)))
            .collect();
        Ok(())
    }

    /// Neighbour ids of `node` in ascending order.
    pub fn neighbours(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == node {
                    Some(b)
                } else if b == node {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Adjacency lists for all nodes, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj.iter_mut().for_each(|l| l.sort_unstable());
        adj
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == node || b == node)
            .count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count() + 1 == self.node_count() && self.is_connected()
    }

    /// True when the graph is a single simple path.
    pub fn is_path(&self) -> bool {
        self.is_tree() && self.degrees().iter().all(|&d| d <= 2)
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node < self.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    fn check_dim(&self, pos: &[f64]) -> Result<()> {
        if pos.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: pos.len(),
            })
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphFile::from(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::parse("<json>", e))?;
        file.try_into()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }
}

/// On-disk graph layout: `{ "dimension": d, "nodes": [[..]..], "edges": [[i,j]..] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub dimension: usize,
    pub nodes: Vec<Vec<f64>>,
    pub edges: Vec<[usize; 2]>,
}

impl From<&EmbeddedGraph> for GraphFile {
    fn from(g: &EmbeddedGraph) -> Self {
        GraphFile {
            dimension: g.dim,
            nodes: g.positions.clone(),
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl TryFrom<GraphFile> for EmbeddedGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        if let Some(bad) = f.nodes.iter().find(|p| p.len() != f.dimension) {
            return Err(Error::DimensionMismatch {
                expected: f.dimension,
                found: bad.len(),
            });
        }
        EmbeddedGraph::new(f.nodes, f.edges.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

/// A node together with all of its graph neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Star {
    pub center: usize,
    pub leaves: Vec<usize>,
}

impl Star {
    pub fn degree(&self) -> usize {
        self.leaves.len()
    }
}

pub fn star_of(graph: &EmbeddedGraph, node: usize) -> Result<Star> {
    graph.check_node(node)?;
    Ok(Star {
        center: node,
        leaves: graph.neighbours(node),
    })
}

/// Sum of Euclidean edge lengths.
pub fn graph_length(graph: &EmbeddedGraph) -> f64 {
    graph
        .edges
        .iter()
        .map(|&(a, b)| dist2(graph.position(a), graph.position(b)).sqrt())
        .sum()
}

fn deviation_from_leaf_mean(graph: &EmbeddedGraph, center: usize, leaves: &[usize]) -> f64 {
    if leaves.len() <= 1 {
        return 0.0;
    }
    let k = leaves.len() as f64;
    let v0 = graph.position(center);
    let dev: Vec<f64> = (0..graph.dim)
        .map(|c| v0[c] - leaves.iter().map(|&l| graph.positions[l][c]).sum::<f64>() / k)
        .collect();
    norm2(&dev)
}

/// ‖v₀ − mean(leaves)‖² for the star centred at `node`; zero for stars of
/// degree ≤ 1.
pub fn star_nonharmonicity(graph: &EmbeddedGraph, node: usize) -> Result<f64> {
    let star = star_of(graph, node)?;
    Ok(deviation_from_leaf_mean(graph, node, &star.leaves))
}

/// n² · Σ over all nodes of the star non-harmonicity, n = node count.
pub fn geometrical_complexity(graph: &EmbeddedGraph) -> f64 {
    let adj = graph.adjacency();
    let sum: f64 = adj
        .iter()
        .enumerate()
        .map(|(v, leaves)| deviation_from_leaf_mean(graph, v, leaves))
        .sum();
    let n = graph.node_count() as f64;
    n * n * sum
}

pub fn node_count(graph: &EmbeddedGraph) -> usize {
    graph.node_count()
}

/// Counts of k-stars for k from the top order down to 3, plus node count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Barcode {
    /// `star_counts[0]` is the count for the highest order.
    pub star_counts: Vec<usize>,
    pub node_count: usize,
}

impl Barcode {
    pub fn max_order(&self) -> usize {
        self.star_counts.len() + 2
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let counts: Vec<String> = self.star_counts.iter().map(|c| c.to_string()).collect();
        write!(f, "{}||{}", counts.join("|"), self.node_count)
    }
}

/// Structural barcode `c_kmax|…|c_3||N`, with slots padded up to
/// `min_max_order` (floored at 3).
pub fn structural_barcode(graph: &EmbeddedGraph, min_max_order: usize) -> Barcode {
    let deg = graph.degrees();
    let top = deg.iter().copied().max().unwrap_or(0).max(min_max_order).max(3);
    let star_counts = (3..=top)
        .rev()
        .map(|k| deg.iter().filter(|&&d| d == k).count())
        .collect();
    Barcode {
        star_counts,
        node_count: graph.node_count(),
    }
}
