//! The unified conflict model over a graph's edges.
//!
//! A `Local` system stores, per vertex `v`, a set `F_v` of unordered pairs of
//! distinct edges that meet exactly at `v`; such a pair is *incompatible*.
//! A `Global` system assigns one color per edge and declares any two edges of
//! equal color incompatible, regardless of incidence; a subgraph compatible
//! with a global system is exactly a rainbow subgraph.
//!
//! Systems are immutable after construction and safe to share across threads.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::rng::SplitMix64;

pub type ColorId = usize;

/// The `Delta` such that a system is `Delta`-bounded and not
/// `(Delta - 1)`-bounded, with a witness attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub max_bound: usize,
    pub witness: BoundWitness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundWitness {
    /// Local mode: a (vertex, edge) pair where the edge participates in
    /// `max_bound` forbidden pairs at that vertex.
    VertexEdge { vertex: VertexId, edge: EdgeId },
    /// Global mode: a color of maximum multiplicity.
    Color { color: ColorId },
    /// The system is empty.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Local,
    Global,
}

#[derive(Debug, Clone)]
pub enum ConflictSystem {
    Local(LocalConflicts),
    Global(EdgeColoring),
}

/// Per-vertex families of forbidden incident edge pairs.
#[derive(Debug, Clone)]
pub struct LocalConflicts {
    /// Number of edges of the underlying graph; used to reject unknown ids.
    edge_count: usize,
    /// F_v keyed by vertex, pairs stored as (min id, max id).
    by_vertex: BTreeMap<VertexId, BTreeSet<(EdgeId, EdgeId)>>,
    /// Flat view for O(1) pair queries. A pair of simple-graph edges shares
    /// at most one vertex, so the flat set loses no information.
    pairs: HashSet<(EdgeId, EdgeId)>,
}

/// A complete edge coloring.
#[derive(Debug, Clone)]
pub struct EdgeColoring {
    colors: Vec<ColorId>,
}

impl ConflictSystem {
    /// Local system with no forbidden pairs.
    pub fn empty_local(graph: &Graph) -> Self {
        ConflictSystem::Local(LocalConflicts {
            edge_count: graph.m(),
            by_vertex: BTreeMap::new(),
            pairs: HashSet::new(),
        })
    }

    /// Local system from explicit (vertex, edge, edge) conflicts. Each pair
    /// must consist of two distinct edges sharing exactly that vertex.
    pub fn local_from_pairs(
        graph: &Graph,
        conflicts: impl IntoIterator<Item = (VertexId, EdgeId, EdgeId)>,
    ) -> Result<Self> {
        let mut by_vertex: BTreeMap<VertexId, BTreeSet<(EdgeId, EdgeId)>> = BTreeMap::new();
        let mut pairs = HashSet::new();
        for (v, e, f) in conflicts {
            validate_incident_pair(graph, v, e, f)?;
            let key = (e.min(f), e.max(f));
            by_vertex.entry(v).or_default().insert(key);
            pairs.insert(key);
        }
        Ok(ConflictSystem::Local(LocalConflicts {
            edge_count: graph.m(),
            by_vertex,
            pairs,
        }))
    }

    /// Local system induced by an edge coloring: `{e, f} ∈ F_v` exactly when
    /// `e` and `f` share `v` and have equal colors.
    pub fn from_local_coloring(graph: &Graph, colors: &[ColorId]) -> Result<Self> {
        if colors.len() != graph.m() {
            return Err(Error::InvalidSystem(format!(
                "coloring covers {} edges, graph has {}",
                colors.len(),
                graph.m()
            )));
        }
        let mut conflicts = Vec::new();
        for v in 0..graph.n() {
            let incident = incident_edge_ids(graph, v);
            for (i, &e) in incident.iter().enumerate() {
                for &f in &incident[i + 1..] {
                    if colors[e] == colors[f] {
                        conflicts.push((v, e, f));
                    }
                }
            }
        }
        Self::local_from_pairs(graph, conflicts)
    }

    /// Global system: one color per edge, conflicts are color equalities.
    pub fn global(graph: &Graph, colors: Vec<ColorId>) -> Result<Self> {
        if colors.len() != graph.m() {
            return Err(Error::InvalidSystem(format!(
                "coloring covers {} edges, graph has {}",
                colors.len(),
                graph.m()
            )));
        }
        Ok(ConflictSystem::Global(EdgeColoring { colors }))
    }

    /// Seeded local system whose bound never exceeds `delta`. Proposals are
    /// drawn per vertex and rejected once either edge already carries `delta`
    /// conflicts there, so the cap is respected exactly; `delta` larger than
    /// `deg(v) - 1` is silently capped per vertex.
    pub fn random_bounded(graph: &Graph, delta: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut conflicts = Vec::new();
        for v in 0..graph.n() {
            let incident = incident_edge_ids(graph, v);
            let deg = incident.len();
            if deg < 2 {
                continue;
            }
            let cap = delta.min(deg - 1);
            if cap == 0 {
                continue;
            }
            let mut load: BTreeMap<EdgeId, usize> = BTreeMap::new();
            let mut chosen: BTreeSet<(EdgeId, EdgeId)> = BTreeSet::new();
            // Proposal volume lands near quarter saturation; rejection keeps
            // every (vertex, edge) load at or below the cap.
            let attempts = (cap * deg) / 8 + 1;
            for _ in 0..attempts {
                let e = incident[rng.below(deg)];
                let f = incident[rng.below(deg)];
                if e == f {
                    continue;
                }
                let key = (e.min(f), e.max(f));
                if chosen.contains(&key) {
                    continue;
                }
                if load.get(&e).copied().unwrap_or(0) >= cap
                    || load.get(&f).copied().unwrap_or(0) >= cap
                {
                    continue;
                }
                chosen.insert(key);
                *load.entry(e).or_default() += 1;
                *load.entry(f).or_default() += 1;
            }
            conflicts.extend(chosen.into_iter().map(|(e, f)| (v, e, f)));
        }
        Self::local_from_pairs(graph, conflicts)
            .expect("generated pairs are incident by construction")
    }

    /// Local system forbidding every pair of edges incident to `v`.
    pub fn star_killer(graph: &Graph, v: VertexId) -> Self {
        let incident = incident_edge_ids(graph, v);
        let mut conflicts = Vec::new();
        for (i, &e) in incident.iter().enumerate() {
            for &f in &incident[i + 1..] {
                conflicts.push((v, e, f));
            }
        }
        Self::local_from_pairs(graph, conflicts).expect("star pairs are incident by construction")
    }

    /// Seeded global coloring in which every color is used at most `bound`
    /// times.
    pub fn global_random(graph: &Graph, bound: usize, seed: u64) -> Self {
        let bound = bound.max(1);
        let mut rng = SplitMix64::new(seed);
        let mut ids: Vec<EdgeId> = (0..graph.m()).collect();
        rng.shuffle(&mut ids);
        let mut colors = vec![0; graph.m()];
        for (slot, &e) in ids.iter().enumerate() {
            colors[e] = slot / bound;
        }
        ConflictSystem::Global(EdgeColoring { colors })
    }

    pub fn mode(&self) -> Mode {
        match self {
            ConflictSystem::Local(_) => Mode::Local,
            ConflictSystem::Global(_) => Mode::Global,
        }
    }

    fn edge_count(&self) -> usize {
        match self {
            ConflictSystem::Local(l) => l.edge_count,
            ConflictSystem::Global(g) => g.colors.len(),
        }
    }

    /// Whether edges `e` and `f` are compatible. Local mode: true unless the
    /// pair is forbidden at their shared vertex (non-incident pairs are
    /// vacuously compatible). Global mode: true exactly when colors differ.
    pub fn is_compatible_pair(&self, e: EdgeId, f: EdgeId) -> Result<bool> {
        if e == f {
            return Err(Error::InvalidSystem(
                "compatibility is defined for distinct edges".into(),
            ));
        }
        let m = self.edge_count();
        if e >= m {
            return Err(Error::UnknownEdge(e));
        }
        if f >= m {
            return Err(Error::UnknownEdge(f));
        }
        Ok(self.compatible(e, f))
    }

    /// Unchecked variant for hot paths; ids must be valid and distinct.
    #[inline]
    pub(crate) fn compatible(&self, e: EdgeId, f: EdgeId) -> bool {
        match self {
            ConflictSystem::Local(l) => !l.pairs.contains(&(e.min(f), e.max(f))),
            ConflictSystem::Global(g) => g.colors[e] != g.colors[f],
        }
    }

    /// Color of an edge in global mode.
    pub fn color(&self, e: EdgeId) -> Option<ColorId> {
        match self {
            ConflictSystem::Local(_) => None,
            ConflictSystem::Global(g) => g.colors.get(e).copied(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            ConflictSystem::Local(l) => l.pairs.is_empty(),
            ConflictSystem::Global(g) => {
                let mut seen = HashSet::new();
                g.colors.iter().all(|c| seen.insert(c))
            }
        }
    }

    /// Computes the exact bound of the system. Local mode: the maximum over
    /// (vertex, incident edge) of the number of forbidden partners. Global
    /// mode: the maximum color multiplicity.
    pub fn max_bound(&self) -> BoundReport {
        match self {
            ConflictSystem::Local(l) => {
                let mut best = BoundReport {
                    max_bound: 0,
                    witness: BoundWitness::None,
                };
                for (&v, pairs) in &l.by_vertex {
                    let mut per_edge: BTreeMap<EdgeId, usize> = BTreeMap::new();
                    for &(e, f) in pairs {
                        *per_edge.entry(e).or_default() += 1;
                        *per_edge.entry(f).or_default() += 1;
                    }
                    for (&e, &count) in &per_edge {
                        if count > best.max_bound {
                            best = BoundReport {
                                max_bound: count,
                                witness: BoundWitness::VertexEdge { vertex: v, edge: e },
                            };
                        }
                    }
                }
                best
            }
            ConflictSystem::Global(g) => {
                let mut mult: BTreeMap<ColorId, usize> = BTreeMap::new();
                for &c in &g.colors {
                    *mult.entry(c).or_default() += 1;
                }
                match mult
                    .into_iter()
                    .max_by_key(|&(c, n)| (n, std::cmp::Reverse(c)))
                {
                    Some((color, n)) => BoundReport {
                        max_bound: n,
                        witness: BoundWitness::Color { color },
                    },
                    None => BoundReport {
                        max_bound: 0,
                        witness: BoundWitness::None,
                    },
                }
            }
        }
    }

    /// Serializes a local system as a JSON array of records
    /// `{"vertex": v, "edge_a": [x, y], "edge_b": [x, z]}`, or a global
    /// system as lines `u v color` in edge-id order.
    pub fn to_file_string(&self, graph: &Graph) -> String {
        match self {
            ConflictSystem::Local(l) => {
                let mut records = Vec::new();
                for (&v, pairs) in &l.by_vertex {
                    for &(e, f) in pairs {
                        records.push(LocalRecord {
                            vertex: v,
                            edge_a: graph.endpoints(e).into(),
                            edge_b: graph.endpoints(f).into(),
                        });
                    }
                }
                let mut s = serde_json::to_string_pretty(&records)
                    .expect("record serialization cannot fail");
                s.push('\n');
                s
            }
            ConflictSystem::Global(g) => {
                let mut s = String::new();
                for (e, &c) in g.colors.iter().enumerate() {
                    let (u, v) = graph.endpoints(e);
                    let _ = writeln!(s, "{u} {v} {c}");
                }
                s
            }
        }
    }

    /// Loads either system format; JSON arrays are local systems, plain text
    /// is a global coloring. Violating records are hard errors naming the
    /// offending record.
    pub fn from_file_string(graph: &Graph, input: &str) -> Result<Self> {
        if input.trim_start().starts_with('[') {
            Self::load_local(graph, input)
        } else {
            Self::load_global(graph, input)
        }
    }

    fn load_local(graph: &Graph, input: &str) -> Result<Self> {
        let records: Vec<LocalRecord> = serde_json::from_str(input)?;
        let mut conflicts = Vec::new();
        for rec in &records {
            let resolve = |pair: &EndpointPair| {
                graph.edge_id(pair.0, pair.1).ok_or_else(|| {
                    Error::InvalidSystem(format!(
                        "record {rec:?}: ({}, {}) is not an edge of the graph",
                        pair.0, pair.1
                    ))
                })
            };
            let e = resolve(&rec.edge_a)?;
            let f = resolve(&rec.edge_b)?;
            validate_incident_pair(graph, rec.vertex, e, f)
                .map_err(|err| Error::InvalidSystem(format!("record {rec:?}: {err}")))?;
            conflicts.push((rec.vertex, e, f));
        }
        Self::local_from_pairs(graph, conflicts)
    }

    fn load_global(graph: &Graph, input: &str) -> Result<Self> {
        let mut colors = vec![None; graph.m()];
        for (idx, line) in input.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let location = format!("line {}", idx + 1);
            let mut parts = line.split_whitespace();
            let mut field = |what: &str| -> Result<usize> {
                parts
                    .next()
                    .ok_or_else(|| Error::Parse {
                        location: location.clone(),
                        message: format!("missing {what}"),
                    })?
                    .parse()
                    .map_err(|_| Error::Parse {
                        location: location.clone(),
                        message: format!("malformed {what}"),
                    })
            };
            let u = field("endpoint")?;
            let v = field("endpoint")?;
            let c = field("color")?;
            let e = graph.edge_id(u, v).ok_or_else(|| {
                Error::InvalidSystem(format!(
                    "{location}: ({u}, {v}) is not an edge of the graph"
                ))
            })?;
            if colors[e].is_some() {
                return Err(Error::InvalidSystem(format!(
                    "{location}: edge ({u}, {v}) colored twice"
                )));
            }
            colors[e] = Some(c);
        }
        let colors = colors
            .into_iter()
            .enumerate()
            .map(|(e, c)| {
                c.ok_or_else(|| {
                    let (u, v) = graph.endpoints(e);
                    Error::InvalidSystem(format!("edge ({u}, {v}) has no color"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConflictSystem::Global(EdgeColoring { colors }))
    }

    /// All forbidden pairs of a local system as (vertex, e, f), in
    /// deterministic order. Empty for global systems.
    pub fn local_pairs(&self) -> Vec<(VertexId, EdgeId, EdgeId)> {
        match self {
            ConflictSystem::Local(l) => l
                .by_vertex
                .iter()
                .flat_map(|(&v, pairs)| pairs.iter().map(move |&(e, f)| (v, e, f)))
                .collect(),
            ConflictSystem::Global(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct LocalRecord {
    vertex: VertexId,
    edge_a: EndpointPair,
    edge_b: EndpointPair,
}

#[derive(Debug, Serialize, Deserialize)]
struct EndpointPair(VertexId, VertexId);

impl From<(VertexId, VertexId)> for EndpointPair {
    fn from((u, v): (VertexId, VertexId)) -> Self {
        EndpointPair(u, v)
    }
}

fn validate_incident_pair(graph: &Graph, v: VertexId, e: EdgeId, f: EdgeId) -> Result<()> {
    if e == f {
        return Err(Error::InvalidSystem(format!(
            "pair at vertex {v} uses the same edge twice"
        )));
    }
    if e >= graph.m() {
        return Err(Error::UnknownEdge(e));
    }
    if f >= graph.m() {
        return Err(Error::UnknownEdge(f));
    }
    let (a1, a2) = graph.endpoints(e);
    let (b1, b2) = graph.endpoints(f);
    let shared = if b1 == a1 || b1 == a2 {
        Some(b1)
    } else if b2 == a1 || b2 == a2 {
        Some(b2)
    } else {
        None
    };
    match shared {
        // Two distinct simple-graph edges share at most one vertex.
        Some(s) if s == v => Ok(()),
        Some(s) => Err(Error::InvalidSystem(format!(
            "edges {e} and {f} share vertex {s}, not {v}"
        ))),
        None => Err(Error::InvalidSystem(format!(
            "edges {e} and {f} share no vertex"
        ))),
    }
}

fn incident_edge_ids(graph: &Graph, v: VertexId) -> Vec<EdgeId> {
    graph
        .neighbors(v)
        .iter()
        .map(|&w| graph.edge_id(v, w).expect("adjacency implies an edge id"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn star(k: usize) -> Graph {
        Graph::new(k + 1, (1..=k).map(|v| (0, v))).unwrap()
    }

    #[test]
    fn empty_local_always_compatible() {
        let g = Graph::complete(4);
        let s = ConflictSystem::empty_local(&g);
        for e in 0..g.m() {
            for f in 0..g.m() {
                if e != f {
                    assert!(s.is_compatible_pair(e, f).unwrap());
                }
            }
        }
        assert_eq!(s.max_bound().max_bound, 0);
    }

    #[test]
    fn local_pair_is_unordered() {
        let g = star(2);
        let e1 = g.edge_id(0, 1).unwrap();
        let e2 = g.edge_id(0, 2).unwrap();
        let s = ConflictSystem::local_from_pairs(&g, vec![(0, e1, e2)]).unwrap();
        assert!(!s.is_compatible_pair(e1, e2).unwrap());
        assert!(!s.is_compatible_pair(e2, e1).unwrap());
    }

    #[test]
    fn global_conflicts_apply_to_disjoint_edges() {
        // Edges (0,1) and (2,3) are vertex-disjoint but share color 3.
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let s = ConflictSystem::global(&g, vec![3, 3]).unwrap();
        assert!(!s.is_compatible_pair(0, 1).unwrap());
    }

    #[test]
    fn unknown_edge_rejected() {
        let g = Graph::complete(3);
        let s = ConflictSystem::empty_local(&g);
        assert!(s.is_compatible_pair(0, 99).is_err());
        assert!(s.is_compatible_pair(1, 1).is_err());
    }

    #[test]
    fn coloring_induced_star_bound() {
        let g = star(3);
        let s = ConflictSystem::from_local_coloring(&g, &[1, 1, 1]).unwrap();
        assert_eq!(s.local_pairs().len(), 3);
        let report = s.max_bound();
        assert_eq!(report.max_bound, 2);
        assert!(matches!(
            report.witness,
            BoundWitness::VertexEdge { vertex: 0, .. }
        ));
    }

    #[test]
    fn rainbow_coloring_induces_empty_system() {
        let g = Graph::complete(4);
        let colors: Vec<ColorId> = (0..g.m()).collect();
        let s = ConflictSystem::from_local_coloring(&g, &colors).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.max_bound().max_bound, 0);
    }

    #[test]
    fn coloring_induced_bound_matches_multiplicity_scan() {
        let g = Graph::gen_gnp(100, 0.3, 5).unwrap();
        let mut rng = SplitMix64::new(17);
        let colors: Vec<ColorId> = (0..g.m()).map(|_| rng.below(5)).collect();
        let s = ConflictSystem::from_local_coloring(&g, &colors).unwrap();
        // Brute force: max over (vertex, color) multiplicities, minus one.
        let mut expected = 0;
        for v in 0..g.n() {
            let mut mult = BTreeMap::new();
            for &w in g.neighbors(v) {
                let e = g.edge_id(v, w).unwrap();
                *mult.entry(colors[e]).or_insert(0usize) += 1;
            }
            for (_, count) in mult {
                expected = expected.max(count.saturating_sub(1));
            }
        }
        assert_eq!(s.max_bound().max_bound, expected);
    }

    #[test]
    fn random_bounded_zero_is_empty() {
        let g = Graph::gen_gnp(50, 0.3, 1).unwrap();
        let s = ConflictSystem::random_bounded(&g, 0, 9);
        assert!(s.is_empty());
    }

    #[test]
    fn star_killer_bound() {
        let g = star(3);
        let s = ConflictSystem::star_killer(&g, 0);
        assert_eq!(s.local_pairs().len(), 3);
        assert_eq!(s.max_bound().max_bound, 2);
    }

    #[test]
    fn random_bounded_respects_delta() {
        let g = Graph::gen_gnp(200, 0.1, 3).unwrap();
        let s = ConflictSystem::random_bounded(&g, 5, 11);
        assert!(s.max_bound().max_bound <= 5);
    }

    #[test]
    fn global_random_respects_bound() {
        let g = Graph::gen_gnp(60, 0.4, 2).unwrap();
        let s = ConflictSystem::global_random(&g, 3, 7);
        assert!(s.max_bound().max_bound <= 3);
    }

    #[test]
    fn local_round_trip_preserves_pairs() {
        let g = Graph::gen_gnp(30, 0.4, 4).unwrap();
        let s = ConflictSystem::random_bounded(&g, 3, 21);
        let text = s.to_file_string(&g);
        let back = ConflictSystem::from_file_string(&g, &text).unwrap();
        assert_eq!(s.local_pairs(), back.local_pairs());
        assert_eq!(back.to_file_string(&g), text);
    }

    #[test]
    fn global_round_trip_preserves_colors() {
        let g = Graph::gen_gnp(30, 0.4, 4).unwrap();
        let s = ConflictSystem::global_random(&g, 4, 8);
        let text = s.to_file_string(&g);
        let back = ConflictSystem::from_file_string(&g, &text).unwrap();
        for e in 0..g.m() {
            assert_eq!(s.color(e), back.color(e));
        }
        assert_eq!(back.to_file_string(&g), text);
    }

    #[test]
    fn load_rejects_non_incident_record() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let bad = r#"[{"vertex": 0, "edge_a": [0, 1], "edge_b": [2, 3]}]"#;
        let err = ConflictSystem::from_file_string(&g, bad).unwrap_err();
        assert!(err.to_string().contains("share no vertex"));
    }

    #[test]
    fn load_rejects_missing_color() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let err = ConflictSystem::from_file_string(&g, "0 1 4\n").unwrap_err();
        assert!(err.to_string().contains("no color"));
    }

    proptest! {
        #[test]
        fn pair_query_symmetry(seed in 0u64..200, delta in 0usize..4) {
            let g = Graph::gen_gnp(20, 0.5, seed).unwrap();
            let s = ConflictSystem::random_bounded(&g, delta, seed ^ 0xabcd);
            for e in 0..g.m() {
                for f in (e + 1)..g.m() {
                    prop_assert_eq!(
                        s.is_compatible_pair(e, f).unwrap(),
                        s.is_compatible_pair(f, e).unwrap()
                    );
                }
            }
        }

        #[test]
        fn random_bounded_delta_holds(seed in 0u64..300, delta in 0usize..6) {
            let g = Graph::gen_gnp(40, 0.3, seed).unwrap();
            let s = ConflictSystem::random_bounded(&g, delta, seed.wrapping_mul(31));
            prop_assert!(s.max_bound().max_bound <= delta);
        }

        #[test]
        fn induced_system_agrees_with_color_comparison(seed in 0u64..100) {
            let g = Graph::gen_gnp(15, 0.6, seed).unwrap();
            let mut rng = SplitMix64::new(seed ^ 0x55);
            let colors: Vec<ColorId> = (0..g.m()).map(|_| rng.below(4)).collect();
            let s = ConflictSystem::from_local_coloring(&g, &colors).unwrap();
            for e in 0..g.m() {
                for f in (e + 1)..g.m() {
                    let (a, b) = g.endpoints(e);
                    let (c, d) = g.endpoints(f);
                    let incident = a == c || a == d || b == c || b == d;
                    let expected = if incident { colors[e] != colors[f] } else { true };
                    prop_assert_eq!(s.is_compatible_pair(e, f).unwrap(), expected);
                }
            }
        }
    }
}
