//! Undirected graphs with dense edge queries and stable edge identifiers,
//! digraphs, paths, and the seeded G(n,p) generator.
//!
//! Edge ids are assigned in lexicographic order of `(min endpoint, max
//! endpoint)`, so two runs that produce the same edge set agree on every id.
//! Graphs are immutable after construction and safe to share across threads.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub type VertexId = usize;
pub type EdgeId = usize;

/// Simple undirected graph. No self-loops, no parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Sorted lexicographically; the position of a pair is its edge id.
    edges: Vec<(VertexId, VertexId)>,
    /// Sorted neighbor lists.
    adj: Vec<Vec<VertexId>>,
    /// Packed adjacency matrix rows for O(1) membership tests.
    bits: BitMatrix,
}

impl Graph {
    /// Builds a graph from an edge list. Pairs may come in any order and
    /// orientation; duplicates and self-loops are rejected.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
        for (u, v) in pairs {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            let dup = edges.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                dup.0, dup.1
            )));
        }
        let mut adj = vec![Vec::new(); n];
        let mut bits = BitMatrix::new(n);
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
            bits.set(u, v);
            bits.set(v, u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Self { n, edges, adj, bits })
    }

    /// Seeded Erdos-Renyi graph: every unordered pair is an edge
    /// independently with probability `p`. Identical `(n, p, seed)` produce
    /// identical graphs.
    pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidProbability(p));
        }
        let mut rng = SplitMix64::new(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.bernoulli(p) {
                    edges.push((u, v));
                }
            }
        }
        Self::new(n, edges)
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v)));
        Self::new(n, edges).expect("complete graph is always valid")
    }

    /// Cycle 0-1-...-(n-1)-0. Requires `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least 3 vertices");
        let edges = (0..n).map(|u| (u, (u + 1) % n));
        Self::new(n, edges).expect("cycle graph is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n && v < self.n && self.bits.get(u, v)
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Endpoints of edge `id`, as `(min, max)`.
    pub fn endpoints(&self, id: EdgeId) -> (VertexId, VertexId) {
        self.edges[id]
    }

    /// Edge id of `{u, v}`, if present.
    pub fn edge_id(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    /// Number of edges with both endpoints in `set`.
    pub fn edge_count_within(&self, set: &[VertexId]) -> usize {
        let mut marked = vec![false; self.n];
        for &v in set {
            marked[v] = true;
        }
        self.edges
            .iter()
            .filter(|&&(u, v)| marked[u] && marked[v])
            .count()
    }

    /// Number of edges with one endpoint in `xs` and the other in `ys`.
    /// The sets are expected to be disjoint.
    pub fn edge_count_between(&self, xs: &[VertexId], ys: &[VertexId]) -> usize {
        let mut in_y = vec![false; self.n];
        for &y in ys {
            in_y[y] = true;
        }
        let mut count = 0;
        for &x in xs {
            for &w in self.neighbors(x) {
                if in_y[w] {
                    count += 1;
                }
            }
        }
        count
    }

    /// N(X): vertices adjacent to some vertex of `set` (may include members
    /// of the set itself).
    pub fn neighborhood(&self, set: &[VertexId]) -> BTreeSet<VertexId> {
        let mut out = BTreeSet::new();
        for &v in set {
            out.extend(self.neighbors(v).iter().copied());
        }
        out
    }

    /// Text format: first line `n m`, then `m` lines `u v` with `u < v` in
    /// edge-id order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.m());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the text format. Edges must appear in edge-id order with
    /// `u < v`, so that write-read round-trips are byte identical.
    pub fn from_text(input: &str) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            location: "line 1".into(),
            message: "empty graph file".into(),
        })?;
        let mut parts = header.split_whitespace();
        let n: usize = parse_field(parts.next(), "line 1", "vertex count")?;
        let m: usize = parse_field(parts.next(), "line 1", "edge count")?;
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let location = format!("line {}", idx + 1);
            let mut parts = line.split_whitespace();
            let u: usize = parse_field(parts.next(), &location, "edge endpoint")?;
            let v: usize = parse_field(parts.next(), &location, "edge endpoint")?;
            if u >= v {
                return Err(Error::Parse {
                    location,
                    message: format!("expected u < v, got {u} {v}"),
                });
            }
            if let Some(&last) = edges.last() {
                if last >= (u, v) {
                    return Err(Error::Parse {
                        location,
                        message: "edges not in edge-id (lexicographic) order".into(),
                    });
                }
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                location: "end of file".into(),
                message: format!("header promised {m} edges, found {}", edges.len()),
            });
        }
        Self::new(n, edges)
    }

    /// Structured-object form mirroring the text format fields.
    pub fn to_json(&self) -> String {
        let file = GraphFile {
            n: self.n,
            edges: self.edges.clone(),
        };
        let mut s = serde_json::to_string(&file).expect("graph serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(input: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(input)?;
        let g = Self::new(file.n, file.edges.iter().copied())?;
        if g.edges != file.edges {
            return Err(Error::InvalidGraph(
                "edges not in edge-id (lexicographic) order".into(),
            ));
        }
        Ok(g)
    }

    /// Loads either format: JSON if the content starts with `{`.
    pub fn from_str_any(input: &str) -> Result<Self> {
        if input.trim_start().starts_with('{') {
            Self::from_json(input)
        } else {
            Self::from_text(input)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize)>,
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    location: &str,
    what: &str,
) -> Result<T> {
    field
        .ok_or_else(|| Error::Parse {
            location: location.into(),
            message: format!("missing {what}"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            location: location.into(),
            message: format!("malformed {what}"),
        })
}

/// Packed boolean matrix, one bit per (row, column).
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitMatrix {
    n: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words_per_row = n.div_ceil(64);
        Self {
            n,
            words_per_row,
            words: vec![0; n * words_per_row],
        }
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize) {
        self.words[r * self.words_per_row + c / 64] |= 1u64 << (c % 64);
    }

    #[inline]
    fn get(&self, r: usize, c: usize) -> bool {
        self.words[r * self.words_per_row + c / 64] & (1u64 << (c % 64)) != 0
    }
}

/// Directed graph on `m` vertices. No self-arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    m: usize,
    out_adj: Vec<Vec<VertexId>>,
    in_adj: Vec<Vec<VertexId>>,
    bits: BitMatrix,
}

impl Digraph {
    pub fn new(m: usize, arcs: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self> {
        let mut out_adj = vec![Vec::new(); m];
        let mut in_adj = vec![Vec::new(); m];
        let mut bits = BitMatrix::new(m);
        for (u, v) in arcs {
            if u == v {
                return Err(Error::InvalidDigraph(format!("self-arc at vertex {u}")));
            }
            if u >= m || v >= m {
                return Err(Error::InvalidDigraph(format!(
                    "arc ({u}, {v}) out of range for m = {m}"
                )));
            }
            if bits.get(u, v) {
                return Err(Error::InvalidDigraph(format!("duplicate arc ({u}, {v})")));
            }
            bits.set(u, v);
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Self { m, out_adj, in_adj, bits })
    }

    pub fn vertex_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn has_arc(&self, u: VertexId, v: VertexId) -> bool {
        u < self.m && v < self.m && self.bits.get(u, v)
    }

    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_adj[v].len()
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_adj[v].len()
    }

    pub fn arc_count(&self) -> usize {
        self.out_adj.iter().map(|l| l.len()).sum()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
    }

    pub fn min_in_degree(&self) -> Option<(VertexId, usize)> {
        (0..self.m).map(|v| (v, self.in_degree(v))).min_by_key(|&(_, d)| d)
    }

    pub fn min_out_degree(&self) -> Option<(VertexId, usize)> {
        (0..self.m).map(|v| (v, self.out_degree(v))).min_by_key(|&(_, d)| d)
    }

    /// True when every vertex can reach every other one. Vacuously true for
    /// `m <= 1`.
    pub fn strongly_connected(&self) -> bool {
        if self.m <= 1 {
            return true;
        }
        let reach = |adj: &Vec<Vec<VertexId>>| {
            let mut seen = vec![false; self.m];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(&self.out_adj) && reach(&self.in_adj)
    }
}

/// Path over a host graph: distinct vertices, every consecutive pair a host
/// edge. `|P|` is the vertex count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    vertices: Vec<VertexId>,
}

impl Path {
    /// Validates `vertices` against `host` and wraps it.
    pub fn in_graph(host: &Graph, vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidPath("empty vertex sequence".into()));
        }
        let mut seen = vec![false; host.n()];
        for &v in &vertices {
            if v >= host.n() {
                return Err(Error::InvalidPath(format!("vertex {v} out of range")));
            }
            if seen[v] {
                return Err(Error::InvalidPath(format!("repeated vertex {v}")));
            }
            seen[v] = true;
        }
        for w in vertices.windows(2) {
            if !host.has_edge(w[0], w[1]) {
                return Err(Error::InvalidPath(format!(
                    "step ({}, {}) is not an edge of the host",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { vertices })
    }

    /// Vertex count; the number of edges is `len() - 1`.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }
}

/// Cyclic vertex sequence; the closing edge is implicit between the last and
/// first entries. Structural validity against a graph and a conflict system
/// is established by `verify::verify_cycle`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cycle(pub Vec<VertexId>);

impl Cycle {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    /// Consecutive vertex pairs, including the wrap-around step.
    pub fn steps(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let k = self.0.len();
        (0..k).map(move |i| (self.0[i], self.0[(i + 1) % k]))
    }

    pub fn to_line(&self) -> String {
        let mut s = self
            .0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        s.push('\n');
        s
    }

    pub fn from_line(input: &str) -> Result<Self> {
        let vertices = input
            .split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|_| Error::Parse {
                    location: "cycle file".into(),
                    message: format!("malformed vertex id {tok:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(vertices))
    }
}
