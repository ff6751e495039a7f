//! The semi-random matching process: a seeded bisection, sparse edge
//! retention, iterative "nibble" rounds that keep only isolated picks, and a
//! deterministic augmenting-path finish on whatever remains.
//!
//! One round picks every edge of the working bipartite graph independently
//! with probability `delta * n_i / m_i`, keeps the picks incident to no other
//! pick, removes the matched vertices, and repeats. For odd orders the
//! bisection is unbalanced by one and the finish first selects a length-two
//! path `(a, v*, b)` whose two edges are compatible, then matches the rest.
//! Every step is driven by the caller's seed, so runs reproduce exactly.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::conflict::ConflictSystem;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::rng::SplitMix64;

/// Hard ceiling on rounds; paper-mode parameters that blow past it are
/// rejected as impractical.
pub const MAX_ROUNDS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NibbleMode {
    /// `delta` and the round count are recomputed from `epsilon` exactly:
    /// `delta = exp(-22/eps * ln(1/eps))`, `T = ln(4/eps) / -ln(1 - delta)`.
    /// For any small `epsilon` these are astronomically impractical and the
    /// parameters are rejected with a diagnostic pointing at desk mode.
    Paper { epsilon: f64 },
    /// Explicit `delta` and round count; `epsilon` still controls the edge
    /// retention probability `epsilon / 4`.
    Desk {
        epsilon: f64,
        delta: f64,
        rounds: usize,
    },
}

#[derive(Debug, Clone)]
pub struct NibbleParams {
    pub mode: NibbleMode,
    pub seed: u64,
    /// Fresh-sub-seed attempts when the finish fails.
    pub restart_cap: usize,
}

impl NibbleParams {
    pub fn desk(epsilon: f64, delta: f64, rounds: usize, seed: u64) -> Self {
        Self {
            mode: NibbleMode::Desk {
                epsilon,
                delta,
                rounds,
            },
            seed,
            restart_cap: 1000,
        }
    }

    pub fn paper(epsilon: f64, seed: u64) -> Self {
        Self {
            mode: NibbleMode::Paper { epsilon },
            seed,
            restart_cap: 1000,
        }
    }

    /// Resolves the mode into concrete `(epsilon, delta, rounds)`.
    pub fn resolve(&self) -> Result<(f64, f64, usize)> {
        match self.mode {
            NibbleMode::Paper { epsilon } => {
                if !(epsilon > 0.0) {
                    return Err(Error::NibbleConfig("epsilon must be positive".into()));
                }
                let inv = 1.0 / epsilon;
                let delta = (-22.0 * inv * inv.ln()).exp();
                if !(0.0..1.0).contains(&delta) || delta == 0.0 {
                    return Err(Error::NibbleConfig(format!(
                        "paper-mode delta = exp(-22/eps ln(1/eps)) = {delta:e} is outside (0, 1) \
                         for epsilon = {epsilon}; use desk mode with explicit delta and rounds"
                    )));
                }
                let rounds = (4.0 / epsilon).ln() / -(1.0 - delta).ln();
                if !rounds.is_finite() || rounds > MAX_ROUNDS as f64 {
                    return Err(Error::NibbleConfig(format!(
                        "paper-mode delta = {delta:e} yields T = ln(4/eps)/-ln(1-delta) = {rounds:e} \
                         rounds, beyond any practical budget; use desk mode with explicit delta \
                         and rounds"
                    )));
                }
                let rounds = rounds.ceil() as usize;
                if rounds == 0 {
                    return Err(Error::NibbleConfig(
                        "paper-mode round count resolves to zero; use desk mode".into(),
                    ));
                }
                Ok((epsilon, delta, rounds))
            }
            NibbleMode::Desk {
                epsilon,
                delta,
                rounds,
            } => {
                if !(epsilon > 0.0) {
                    return Err(Error::NibbleConfig("epsilon must be positive".into()));
                }
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(Error::NibbleConfig(format!(
                        "delta must lie in (0, 1), got {delta}"
                    )));
                }
                if rounds == 0 || rounds > MAX_ROUNDS {
                    return Err(Error::NibbleConfig(format!(
                        "round count must lie in 1..={MAX_ROUNDS}, got {rounds}"
                    )));
                }
                Ok((epsilon, delta, rounds))
            }
        }
    }
}

/// A perfect matching over a bisection, with the odd-order triple.
///
/// Element `i` pairs `a_i` with `b_i`; when the order is odd the last
/// element is the length-two path `(a, v*, b)` and the matching edge
/// incident to `a` is `{a, v*}` while the one incident to `b` is `{v*, b}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfectMatching {
    pairs: Vec<(VertexId, VertexId)>,
    v_star: Option<VertexId>,
}

impl PerfectMatching {
    /// Validates coverage, disjointness, and that every matching edge (or
    /// triple edge) is a graph edge.
    pub fn new(
        graph: &Graph,
        pairs: Vec<(VertexId, VertexId)>,
        v_star: Option<VertexId>,
    ) -> Result<Self> {
        let n = graph.n();
        if pairs.len() != n / 2 {
            return Err(Error::InvalidMatching(format!(
                "expected {} pairs for order {n}, got {}",
                n / 2,
                pairs.len()
            )));
        }
        if (n % 2 == 1) != v_star.is_some() {
            return Err(Error::InvalidMatching(
                "the hub vertex must be present exactly for odd orders".into(),
            ));
        }
        let mut seen = vec![false; n];
        let mut mark = |v: VertexId| -> Result<()> {
            if v >= n {
                return Err(Error::InvalidMatching(format!("vertex {v} out of range")));
            }
            if seen[v] {
                return Err(Error::InvalidMatching(format!("vertex {v} covered twice")));
            }
            seen[v] = true;
            Ok(())
        };
        for &(a, b) in &pairs {
            mark(a)?;
            mark(b)?;
        }
        if let Some(h) = v_star {
            mark(h)?;
        }
        if seen.iter().any(|&s| !s) {
            let missing = seen.iter().position(|&s| !s).unwrap();
            return Err(Error::InvalidMatching(format!(
                "vertex {missing} is not covered"
            )));
        }
        let last = pairs.len() - 1;
        for (i, &(a, b)) in pairs.iter().enumerate() {
            match v_star {
                Some(h) if i == last => {
                    if !graph.has_edge(a, h) || !graph.has_edge(h, b) {
                        return Err(Error::InvalidMatching(format!(
                            "triple ({a}, {h}, {b}) is not a length-two path in the graph"
                        )));
                    }
                }
                _ => {
                    if !graph.has_edge(a, b) {
                        return Err(Error::InvalidMatching(format!(
                            "pair ({a}, {b}) is not a graph edge"
                        )));
                    }
                }
            }
        }
        Ok(Self { pairs, v_star })
    }

    /// Number of matching elements, `floor(n / 2)`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(VertexId, VertexId)] {
        &self.pairs
    }

    pub fn v_star(&self) -> Option<VertexId> {
        self.v_star
    }

    pub fn a(&self, i: usize) -> VertexId {
        self.pairs[i].0
    }

    pub fn b(&self, i: usize) -> VertexId {
        self.pairs[i].1
    }

    /// Index of the triple element, when present (always the last).
    pub fn triple_index(&self) -> Option<usize> {
        self.v_star.map(|_| self.pairs.len() - 1)
    }

    /// Endpoints of the matching edge incident to `a_i`.
    pub fn edge_at_a(&self, i: usize) -> (VertexId, VertexId) {
        match self.v_star {
            Some(h) if i == self.pairs.len() - 1 => (self.a(i), h),
            _ => (self.a(i), self.b(i)),
        }
    }

    /// Endpoints of the matching edge incident to `b_i`.
    pub fn edge_at_b(&self, i: usize) -> (VertexId, VertexId) {
        match self.v_star {
            Some(h) if i == self.pairs.len() - 1 => (h, self.b(i)),
            _ => (self.a(i), self.b(i)),
        }
    }

    /// The vertex sequence of element `i`: `[a_i, b_i]` or `[a, v*, b]`.
    pub fn element_vertices(&self, i: usize) -> Vec<VertexId> {
        match self.v_star {
            Some(h) if i == self.pairs.len() - 1 => vec![self.a(i), h, self.b(i)],
            _ => vec![self.a(i), self.b(i)],
        }
    }
}

/// Per-round bookkeeping row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    pub iteration: usize,
    /// `|B_i|`; for odd orders `|A_i| = n_i + 1`.
    pub n_i: usize,
    /// Edge count of the working graph at the start of the round.
    pub m_i: usize,
    /// `|M_i^{(0)}|`, the raw picks.
    pub chosen: usize,
    /// `|M_i|`, the isolated picks that survive.
    pub kept: usize,
    /// `|M_i^{(1)}| = chosen - kept`.
    pub discarded: usize,
    /// Degree extremes over all vertices of the working graph.
    pub min_deg: usize,
    pub max_deg: usize,
}

/// Snapshot of the working bipartite graph at the start of a round.
#[derive(Debug, Clone)]
pub struct RoundSnapshot {
    pub side_a: Vec<VertexId>,
    pub side_b: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
}

#[derive(Debug, Clone)]
pub struct FinalStage {
    pub side_a: usize,
    pub side_b: usize,
    pub edges: usize,
    pub matching_size: usize,
    pub perfect: bool,
    /// `(a, v*, b)` for odd orders.
    pub triple: Option<(VertexId, VertexId, VertexId)>,
}

/// Full execution record of one matching attempt, retained for diagnostics
/// and the normality checks.
#[derive(Debug, Clone)]
pub struct NibbleTrace {
    /// Attempt index that produced this trace (0-based).
    pub attempt: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub rounds: usize,
    /// Retention probability of crossing edges, `epsilon / 4`; the marginal
    /// edge probability of the working graph is `q = keep_prob * p`.
    pub keep_prob: f64,
    pub rows: Vec<TraceRow>,
    /// State at the start of rounds `0..=T` (entry `T` is the finish state).
    pub snapshots: Vec<RoundSnapshot>,
    /// `M_i^{(0)}` per round.
    pub chosen_sets: Vec<Vec<(VertexId, VertexId)>>,
    /// `M_i` per round.
    pub kept_sets: Vec<Vec<(VertexId, VertexId)>>,
    pub final_stage: Option<FinalStage>,
}

impl NibbleTrace {
    /// Tabular export, one row per round.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,n_i,m_i,chosen,kept,discarded,min_deg,max_deg\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.iteration, r.n_i, r.m_i, r.chosen, r.kept, r.discarded, r.min_deg, r.max_deg
            );
        }
        out
    }
}

#[derive(Debug)]
pub struct NibbleFailure {
    pub attempts: usize,
    pub reason: String,
    /// Trace of the last attempt.
    pub trace: NibbleTrace,
}

/// Runs the matching process on `graph`, restarting with fresh sub-seeds up
/// to the restart cap. Identical inputs and seeds reproduce identical
/// outputs.
pub fn nibble_matching(
    graph: &Graph,
    system: &ConflictSystem,
    params: &NibbleParams,
) -> std::result::Result<(PerfectMatching, NibbleTrace), Box<NibbleFailure>> {
    let (epsilon, delta, rounds) = match params.resolve() {
        Ok(resolved) => resolved,
        Err(e) => {
            return Err(Box::new(NibbleFailure {
                attempts: 0,
                reason: e.to_string(),
                trace: empty_trace(),
            }))
        }
    };
    if graph.n() < 4 {
        return Err(Box::new(NibbleFailure {
            attempts: 0,
            reason: format!("order {} is below the minimum of 4", graph.n()),
            trace: empty_trace(),
        }));
    }

    let mut rng = SplitMix64::new(params.seed);
    let mut last_trace = None;
    let attempts = params.restart_cap.max(1);
    for attempt in 0..attempts {
        let mut attempt_rng = rng.fork();
        match run_attempt(graph, system, epsilon, delta, rounds, attempt, &mut attempt_rng) {
            Ok((matching, trace)) => return Ok((matching, trace)),
            Err(trace) => last_trace = Some(trace),
        }
    }
    Err(Box::new(NibbleFailure {
        attempts,
        reason: "no attempt produced a perfect matching".into(),
        trace: last_trace.expect("at least one attempt ran"),
    }))
}

fn empty_trace() -> NibbleTrace {
    NibbleTrace {
        attempt: 0,
        epsilon: 0.0,
        delta: 0.0,
        rounds: 0,
        keep_prob: 0.0,
        rows: Vec::new(),
        snapshots: Vec::new(),
        chosen_sets: Vec::new(),
        kept_sets: Vec::new(),
        final_stage: None,
    }
}

fn run_attempt(
    graph: &Graph,
    system: &ConflictSystem,
    epsilon: f64,
    delta: f64,
    rounds: usize,
    attempt: usize,
    rng: &mut SplitMix64,
) -> std::result::Result<(PerfectMatching, NibbleTrace), NibbleTrace> {
    let n = graph.n();
    let keep_prob = epsilon / 4.0;
    let mut trace = NibbleTrace {
        attempt,
        epsilon,
        delta,
        rounds,
        keep_prob,
        rows: Vec::new(),
        snapshots: Vec::new(),
        chosen_sets: Vec::new(),
        kept_sets: Vec::new(),
        final_stage: None,
    };

    // Step 1: uniform bisection, A one larger for odd orders, then sparse
    // retention of crossing edges.
    let mut order: Vec<VertexId> = (0..n).collect();
    rng.shuffle(&mut order);
    let a_size = n.div_ceil(2);
    let mut side_a: Vec<VertexId> = order[..a_size].to_vec();
    let mut side_b: Vec<VertexId> = order[a_size..].to_vec();
    side_a.sort_unstable();
    side_b.sort_unstable();
    let mut in_a = vec![false; n];
    for &v in &side_a {
        in_a[v] = true;
    }

    let mut h_edges: Vec<(VertexId, VertexId)> = Vec::new();
    for &(u, v) in graph.edges() {
        if in_a[u] != in_a[v] && rng.bernoulli(keep_prob) {
            // Store as (A-side, B-side).
            let (x, y) = if in_a[u] { (u, v) } else { (v, u) };
            h_edges.push((x, y));
        }
    }

    let mut kept_all: Vec<Vec<(VertexId, VertexId)>> = Vec::new();

    // Step 2: T nibble rounds.
    for i in 0..rounds {
        trace.snapshots.push(RoundSnapshot {
            side_a: side_a.clone(),
            side_b: side_b.clone(),
            edges: h_edges.clone(),
        });
        let n_i = side_b.len();
        let m_i = h_edges.len();
        let (min_deg, max_deg) = degree_extremes(&side_a, &side_b, &h_edges, n);

        let prob = if m_i == 0 {
            0.0
        } else {
            (delta * n_i as f64 / m_i as f64).min(1.0)
        };
        let chosen: Vec<(VertexId, VertexId)> = h_edges
            .iter()
            .copied()
            .filter(|_| rng.bernoulli(prob))
            .collect();

        // Keep only picks isolated within the picked set.
        let mut touch = vec![0u8; n];
        for &(x, y) in &chosen {
            touch[x] = touch[x].saturating_add(1);
            touch[y] = touch[y].saturating_add(1);
        }
        let kept: Vec<(VertexId, VertexId)> = chosen
            .iter()
            .copied()
            .filter(|&(x, y)| touch[x] == 1 && touch[y] == 1)
            .collect();

        trace.rows.push(TraceRow {
            iteration: i,
            n_i,
            m_i,
            chosen: chosen.len(),
            kept: kept.len(),
            discarded: chosen.len() - kept.len(),
            min_deg,
            max_deg,
        });

        let mut matched = vec![false; n];
        for &(x, y) in &kept {
            matched[x] = true;
            matched[y] = true;
        }
        side_a.retain(|&v| !matched[v]);
        side_b.retain(|&v| !matched[v]);
        h_edges.retain(|&(x, y)| !matched[x] && !matched[y]);

        trace.chosen_sets.push(chosen);
        trace.kept_sets.push(kept.clone());
        kept_all.push(kept);
    }
    trace.snapshots.push(RoundSnapshot {
        side_a: side_a.clone(),
        side_b: side_b.clone(),
        edges: h_edges.clone(),
    });

    // Step 3: odd orders first pin the (a, v*, b) triple.
    let mut triple: Option<(VertexId, VertexId, VertexId)> = None;
    if n % 2 == 1 {
        triple = select_triple(graph, system, &side_a, &side_b, &h_edges);
        let Some((a, hub, b)) = triple else {
            trace.final_stage = Some(FinalStage {
                side_a: side_a.len(),
                side_b: side_b.len(),
                edges: h_edges.len(),
                matching_size: 0,
                perfect: false,
                triple: None,
            });
            return Err(trace);
        };
        side_a.retain(|&v| v != a && v != hub);
        side_b.retain(|&v| v != b);
        h_edges.retain(|&(x, y)| x != a && x != hub && y != b);
    }

    // Deterministic augmenting-path maximum matching on the remainder.
    let final_pairs = maximum_bipartite_matching(&side_a, &side_b, &h_edges, n);
    let perfect = final_pairs.len() == side_a.len() && side_a.len() == side_b.len();
    trace.final_stage = Some(FinalStage {
        side_a: side_a.len(),
        side_b: side_b.len(),
        edges: h_edges.len(),
        matching_size: final_pairs.len(),
        perfect,
        triple,
    });
    if !perfect {
        return Err(trace);
    }

    let mut pairs: Vec<(VertexId, VertexId)> = Vec::with_capacity(n / 2);
    for kept in &kept_all {
        pairs.extend(kept.iter().copied());
    }
    pairs.extend(final_pairs);
    let v_star = triple.map(|(_, hub, _)| hub);
    if let Some((a, _, b)) = triple {
        pairs.push((a, b));
    }

    let matching = PerfectMatching::new(graph, pairs, v_star)
        .expect("assembled matching must validate");
    Ok((matching, trace))
}

fn degree_extremes(
    side_a: &[VertexId],
    side_b: &[VertexId],
    edges: &[(VertexId, VertexId)],
    n: usize,
) -> (usize, usize) {
    if side_a.is_empty() && side_b.is_empty() {
        return (0, 0);
    }
    let mut deg = vec![0usize; n];
    for &(x, y) in edges {
        deg[x] += 1;
        deg[y] += 1;
    }
    let mut min_deg = usize::MAX;
    let mut max_deg = 0;
    for &v in side_a.iter().chain(side_b.iter()) {
        min_deg = min_deg.min(deg[v]);
        max_deg = max_deg.max(deg[v]);
    }
    (min_deg, max_deg)
}

/// First (in id order) choice of `a`, `v*` within the A side joined by a
/// graph edge, and `b` on the B side with `{v*, b}` a working-graph edge
/// compatible with `{a, v*}`.
fn select_triple(
    graph: &Graph,
    system: &ConflictSystem,
    side_a: &[VertexId],
    side_b: &[VertexId],
    h_edges: &[(VertexId, VertexId)],
) -> Option<(VertexId, VertexId, VertexId)> {
    let b_set: BTreeSet<VertexId> = side_b.iter().copied().collect();
    let mut hub_neighbors: std::collections::BTreeMap<VertexId, Vec<VertexId>> =
        std::collections::BTreeMap::new();
    for &(x, y) in h_edges {
        hub_neighbors.entry(x).or_default().push(y);
    }
    for &a in side_a {
        for &hub in side_a {
            if a == hub || !graph.has_edge(a, hub) {
                continue;
            }
            let first_edge = graph.edge_id(a, hub).expect("edge checked above");
            if let Some(candidates) = hub_neighbors.get(&hub) {
                let mut sorted = candidates.clone();
                sorted.sort_unstable();
                for b in sorted {
                    if !b_set.contains(&b) {
                        continue;
                    }
                    let second_edge = graph.edge_id(hub, b).expect("H is a subgraph of G");
                    if system.compatible(first_edge, second_edge) {
                        return Some((a, hub, b));
                    }
                }
            }
        }
    }
    None
}

/// Kuhn's algorithm with lowest-id augmenting order.
fn maximum_bipartite_matching(
    side_a: &[VertexId],
    side_b: &[VertexId],
    edges: &[(VertexId, VertexId)],
    n: usize,
) -> Vec<(VertexId, VertexId)> {
    let mut index_b = vec![usize::MAX; n];
    for (i, &b) in side_b.iter().enumerate() {
        index_b[b] = i;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); side_a.len()];
    let mut index_a = vec![usize::MAX; n];
    for (i, &a) in side_a.iter().enumerate() {
        index_a[a] = i;
    }
    for &(x, y) in edges {
        if index_a[x] != usize::MAX && index_b[y] != usize::MAX {
            adj[index_a[x]].push(index_b[y]);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }

    let mut match_b: Vec<Option<usize>> = vec![None; side_b.len()];
    fn try_augment(
        a: usize,
        adj: &[Vec<usize>],
        match_b: &mut Vec<Option<usize>>,
        visited: &mut [bool],
    ) -> bool {
        for &b in &adj[a] {
            if visited[b] {
                continue;
            }
            visited[b] = true;
            if match_b[b].is_none()
                || try_augment(match_b[b].unwrap(), adj, match_b, visited)
            {
                match_b[b] = Some(a);
                return true;
            }
        }
        false
    }

    for a in 0..side_a.len() {
        let mut visited = vec![false; side_b.len()];
        try_augment(a, &adj, &mut match_b, &mut visited);
    }

    let mut out = Vec::new();
    for (b, matched) in match_b.iter().enumerate() {
        if let Some(a) = matched {
            out.push((side_a[*a], side_b[b]));
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_mode_small_epsilon_is_rejected_with_diagnostic() {
        let params = NibbleParams::paper(0.2, 1);
        let err = params.resolve().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("desk mode"), "diagnostic should steer to desk mode: {msg}");
    }

    #[test]
    fn paper_mode_large_epsilon_rejected_on_delta_range() {
        // epsilon = 2 makes ln(1/eps) negative, so delta blows past 1.
        let params = NibbleParams::paper(2.0, 1);
        assert!(params.resolve().is_err());
    }

    #[test]
    fn desk_mode_validates_ranges() {
        assert!(NibbleParams::desk(0.4, 0.0, 3, 1).resolve().is_err());
        assert!(NibbleParams::desk(0.4, 1.0, 3, 1).resolve().is_err());
        assert!(NibbleParams::desk(0.4, 0.1, 0, 1).resolve().is_err());
        assert!(NibbleParams::desk(0.4, 0.1, 3, 1).resolve().is_ok());
    }

    #[test]
    fn k10_desk_matching_is_deterministic_and_covers() {
        let g = Graph::complete(10);
        let s = ConflictSystem::empty_local(&g);
        let mut params = NibbleParams::desk(0.4, 0.1, 3, 5);
        params.restart_cap = 20_000;
        let (m1, _) = nibble_matching(&g, &s, &params).expect("K10 must eventually match");
        assert_eq!(m1.len(), 5);
        assert!(m1.v_star().is_none());
        let (m2, _) = nibble_matching(&g, &s, &params).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn k9_odd_produces_triple() {
        let g = Graph::complete(9);
        let s = ConflictSystem::empty_local(&g);
        let mut params = NibbleParams::desk(0.8, 0.1, 2, 7);
        params.restart_cap = 50_000;
        let (m, trace) = nibble_matching(&g, &s, &params).expect("K9 must eventually match");
        assert_eq!(m.len(), 4);
        let hub = m.v_star().expect("odd order has a hub");
        let k = m.triple_index().unwrap();
        assert!(g.has_edge(m.a(k), hub) && g.has_edge(hub, m.b(k)));
        let e1 = g.edge_id(m.a(k), hub).unwrap();
        let e2 = g.edge_id(hub, m.b(k)).unwrap();
        assert!(s.is_compatible_pair(e1, e2).unwrap());
        let fs = trace.final_stage.unwrap();
        assert!(fs.perfect && fs.triple.is_some());
    }

    #[test]
    fn trace_bookkeeping_identities() {
        let g = Graph::gen_gnp(200, 0.3, 3).unwrap();
        let s = ConflictSystem::empty_local(&g);
        let mut params = NibbleParams::desk(0.8, 0.05, 6, 11);
        params.restart_cap = 50;
        let (matching, trace) = nibble_matching(&g, &s, &params).expect("dense instance matches");
        // n_{i+1} = n_i - |M_i|, chosen = kept + discarded, kept sets are
        // matchings and pairwise disjoint across rounds.
        for w in trace.rows.windows(2) {
            assert_eq!(w[1].n_i, w[0].n_i - trace.kept_sets[w[0].iteration].len());
        }
        for row in &trace.rows {
            assert_eq!(row.chosen, row.kept + row.discarded);
        }
        let mut seen = std::collections::HashSet::new();
        for kept in &trace.kept_sets {
            for &(x, y) in kept {
                assert!(seen.insert(x) && seen.insert(y), "rounds must stay disjoint");
            }
        }
        // Every matched pair is a graph edge and coverage is exact.
        assert_eq!(matching.len(), 100);
    }

    #[test]
    fn deterministic_trace_csv() {
        let g = Graph::gen_gnp(80, 0.5, 9).unwrap();
        let s = ConflictSystem::empty_local(&g);
        let params = NibbleParams::desk(1.6, 0.1, 3, 13);
        let (_, t1) = nibble_matching(&g, &s, &params).unwrap();
        let (_, t2) = nibble_matching(&g, &s, &params).unwrap();
        assert_eq!(t1.to_csv(), t2.to_csv());
    }

    #[test]
    fn rejects_tiny_orders() {
        let g = Graph::complete(3);
        let s = ConflictSystem::empty_local(&g);
        let params = NibbleParams::desk(0.4, 0.1, 2, 1);
        assert!(nibble_matching(&g, &s, &params).is_err());
    }

    #[test]
    fn matching_validation_catches_bad_inputs() {
        let g = Graph::complete(6);
        // Wrong pair count.
        assert!(PerfectMatching::new(&g, vec![(0, 1)], None).is_err());
        // Double coverage.
        assert!(PerfectMatching::new(&g, vec![(0, 1), (1, 2), (3, 4)], None).is_err());
        // Valid even matching.
        assert!(PerfectMatching::new(&g, vec![(0, 1), (2, 3), (4, 5)], None).is_ok());
        // Odd order needs the hub.
        let g7 = Graph::complete(7);
        assert!(PerfectMatching::new(&g7, vec![(0, 1), (2, 3), (4, 5)], Some(6)).is_ok());
        assert!(PerfectMatching::new(&g7, vec![(0, 1), (2, 3), (4, 5)], None).is_err());
    }
}
