//! Vertex-weighted undirected graphs, clique predicates and the exhaustive
//! maximum-weighted-clique oracle.
//!
//! Adjacency is stored densely; every graph in this crate has at most a few
//! hundred vertices and the Gaussian encoding works on the full matrix anyway.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest graph the exhaustive clique oracle accepts.
pub const BRUTEFORCE_MAX_VERTICES: usize = 30;

/// A sorted set of distinct vertex indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    /// Builds a set from arbitrary indices; duplicates are merged.
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    /// All vertices `0..n`.
    pub fn full(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    /// Vertices whose entry in a click pattern is set.
    pub fn from_pattern(pattern: &[bool]) -> Self {
        VertexSet(
            pattern
                .iter()
                .enumerate()
                .filter_map(|(i, &b)| b.then_some(i))
                .collect(),
        )
    }

    pub fn to_pattern(&self, n: usize) -> Vec<bool> {
        let mut p = vec![false; n];
        for &v in &self.0 {
            if v < n {
                p[v] = true;
            }
        }
        p
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter)
    }
}

/// On-disk graph layout: `{ "n": int, "edges": [[i,j],...], "weights": [float,...] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub weights: Vec<f64>,
}

/// Undirected simple graph with non-negative vertex weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct WeightedGraph {
    n: usize,
    adjacency: Vec<bool>,
    weights: Vec<f64>,
}

impl TryFrom<GraphJson> for WeightedGraph {
    type Error = Error;

    fn try_from(g: GraphJson) -> Result<Self> {
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|e| (e[0], e[1])).collect();
        WeightedGraph::new(g.n, &edges, g.weights)
    }
}

impl From<WeightedGraph> for GraphJson {
    fn from(g: WeightedGraph) -> Self {
        GraphJson {
            n: g.n,
            edges: g.edges().into_iter().map(|(i, j)| [i, j]).collect(),
            weights: g.weights,
        }
    }
}

impl WeightedGraph {
    pub fn new(n: usize, edges: &[(usize, usize)], weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("graph needs at least one vertex"));
        }
        if weights.len() != n {
            return Err(Error::invalid(format!(
                "{} weights given for {} vertices",
                weights.len(),
                n
            )));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::invalid(format!(
                "vertex {i} has weight {w}; weights must be finite and non-negative"
            )));
        }
        let mut adjacency = vec![false; n * n];
        for &(i, j) in edges {
            for v in [i, j] {
                if v >= n {
                    return Err(Error::InvalidVertex { index: v, n });
                }
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop on vertex {i}")));
            }
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
        }
        Ok(WeightedGraph {
            n,
            adjacency,
            weights,
        })
    }

    /// Builds a graph from a predicate over unordered pairs `i < j`.
    pub fn from_fn(weights: Vec<f64>, mut adjacent: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let n = weights.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if adjacent(i, j) {
                    edges.push((i, j));
                }
            }
        }
        WeightedGraph::new(n, &edges, weights)
    }

    pub fn complete(weights: Vec<f64>) -> Result<Self> {
        WeightedGraph::from_fn(weights, |_, _| true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    /// Panics on out-of-range indices; use [`WeightedGraph::check`] first for
    /// untrusted input.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&b| b).count() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.has_edge(v, u))
    }

    /// Verifies that every member of `s` is a vertex of this graph.
    pub fn check(&self, s: &VertexSet) -> Result<()> {
        match s.members().last() {
            Some(&v) if v >= self.n => Err(Error::InvalidVertex { index: v, n: self.n }),
            _ => Ok(()),
        }
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        if v >= self.n {
            return Err(Error::InvalidVertex { index: v, n: self.n });
        }
        Ok(self.adjacency[v * self.n..(v + 1) * self.n]
            .iter()
            .filter(|&&b| b)
            .count())
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|v| self.degree(v).expect("in range"))
            .collect()
    }

    /// 0/1 adjacency matrix as reals.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if self.has_edge(i, j) {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Graph Laplacian `D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let deg = self.degrees();
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                deg[i] as f64
            } else if self.has_edge(i, j) {
                -1.0
            } else {
                0.0
            }
        })
    }

    /// Restriction to the vertices of `s`, renumbered `0..|s|` in sorted order.
    /// An empty `s` is rejected because graphs have at least one vertex.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Result<WeightedGraph> {
        self.check(s)?;
        if s.is_empty() {
            return Err(Error::EmptyInput("induced subgraph of the empty set"));
        }
        let idx = s.members();
        let k = idx.len();
        let mut adjacency = vec![false; k * k];
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                adjacency[a * k + b] = self.has_edge(i, j);
            }
        }
        Ok(WeightedGraph {
            n: k,
            adjacency,
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
        })
    }

    /// True iff every pair of members is adjacent. Sets of size 0 and 1 are
    /// cliques.
    pub fn is_clique(&self, s: &VertexSet) -> Result<bool> {
        self.check(s)?;
        Ok(self.is_clique_unchecked(s.members()))
    }

    pub(crate) fn is_clique_unchecked(&self, members: &[usize]) -> bool {
        members
            .iter()
            .enumerate()
            .all(|(a, &i)| members[a + 1..].iter().all(|&j| self.has_edge(i, j)))
    }

    pub fn clique_weight(&self, s: &VertexSet) -> Result<f64> {
        self.check(s)?;
        Ok(s.iter().map(|v| self.weights[v]).sum())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path.as_ref(), text + "\n").map_err(|e| Error::io(&path, e))
    }

    /// DIMACS edge format with 1-based vertices. Vertex weights ride along as
    /// `c weight <v> <w>` comment lines so plain DIMACS readers ignore them.
    pub fn to_dimacs(&self) -> String {
        let edges = self.edges();
        let mut out = String::new();
        let _ = writeln!(out, "c vertex-weighted graph");
        let _ = writeln!(out, "p edge {} {}", self.n, edges.len());
        for (v, w) in self.weights.iter().enumerate() {
            let _ = writeln!(out, "c weight {} {}", v + 1, w);
        }
        for (i, j) in edges {
            let _ = writeln!(out, "e {} {}", i + 1, j + 1);
        }
        out
    }
}

/// Exhaustive maximum-weighted-clique search over every clique of `g`.
///
/// Cliques are visited in lexicographic order of their sorted member lists and
/// a later clique only replaces the incumbent when strictly heavier, so ties
/// resolve to the lexicographically smallest set. Only non-empty cliques are
/// considered.
pub fn max_weighted_clique_bruteforce(g: &WeightedGraph) -> Result<VertexSet> {
    if g.n() > BRUTEFORCE_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "brute-force clique search graph",
            size: g.n(),
            limit: BRUTEFORCE_MAX_VERTICES,
        });
    }
    let masks = neighbor_masks(g);
    let mut best = Incumbent {
        weight: f64::NEG_INFINITY,
        members: Vec::new(),
    };
    let mut stack = Vec::with_capacity(g.n());
    let all = if g.n() == 64 { u64::MAX } else { (1u64 << g.n()) - 1 };
    extend_cliques(g, &masks, all, 0.0, &mut stack, &mut best);
    Ok(VertexSet(best.members))
}

/// Every clique of `g` (including singletons, excluding the empty set), with
/// its weight. Intended for small graphs in tests and instance verification.
pub fn enumerate_cliques(g: &WeightedGraph) -> Result<Vec<(VertexSet, f64)>> {
    if g.n() > BRUTEFORCE_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "clique enumeration graph",
            size: g.n(),
            limit: BRUTEFORCE_MAX_VERTICES,
        });
    }
    let masks = neighbor_masks(g);
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn rec(
        g: &WeightedGraph,
        masks: &[u64],
        cand: u64,
        w: f64,
        stack: &mut Vec<usize>,
        out: &mut Vec<(VertexSet, f64)>,
    ) {
        let mut c = cand;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            stack.push(v);
            let wv = w + g.weight(v);
            out.push((VertexSet(stack.clone()), wv));
            rec(g, masks, masks[v] & c, wv, stack, out);
            stack.pop();
        }
    }
    let all = (1u64 << g.n()) - 1;
    rec(g, &masks, all, 0.0, &mut stack, &mut out);
    Ok(out)
}

struct Incumbent {
    weight: f64,
    members: Vec<usize>,
}

fn neighbor_masks(g: &WeightedGraph) -> Vec<u64> {
    (0..g.n())
        .map(|v| g.neighbors(v).fold(0u64, |m, u| m | (1u64 << u)))
        .collect()
}

// `cand` holds vertices greater than the last member that are adjacent to all
// members.
fn extend_cliques(
    g: &WeightedGraph,
    masks: &[u64],
    cand: u64,
    weight: f64,
    stack: &mut Vec<usize>,
    best: &mut Incumbent,
) {
    let mut c = cand;
    while c != 0 {
        let v = c.trailing_zeros() as usize;
        c &= c - 1;
        stack.push(v);
        let w = weight + g.weight(v);
        if w > best.weight {
            best.weight = w;
            best.members.clone_from(stack);
        }
        extend_cliques(g, masks, masks[v] & c, w, stack, best);
        stack.pop();
    }
}
