//! The sparse constrained Hamilton-cycle solver.
//!
//! Strategy: sample a compatible sparse subgraph `R` by the random d-out
//! construction, keep a path `P` that is rotation-maximal in `P ∪ R`, and
//! repeatedly pick a booster edge of the host graph that stays compatible
//! with everything in `P ∪ R`. Adding the booster closes a cycle through all
//! of `V(P)`; either that cycle is Hamiltonian, or an `R`-edge leaving the
//! cycle extends it into a strictly longer path and the loop continues. On a
//! stall (no compatible booster, or no `R`-edge leaving the cycle) the solver
//! rebuilds `R` from a fresh sub-seed, up to a restart cap.
//!
//! A global (colored) system is handled by the same loop: there the filter
//! keeps the color set of `P ∪ R ∪ {booster}` duplicate-free, so a returned
//! cycle is rainbow.

use std::time::{Duration, Instant};

use crate::conflict::{ConflictSystem, Mode};
use crate::error::{Error, Result};
use crate::expander::{
    is_expander, sample_d_out, subgraph_compatible, DOutParams, ExpanderCertificate,
    ExpanderParams,
};
use crate::graph::{Cycle, EdgeId, Graph, VertexId};
use crate::rng::SplitMix64;
use crate::rotation::{first_accepted_booster, Booster, UnionGraph};
use crate::verify::{verify_cycle, VerifyMode};

#[derive(Debug, Clone)]
pub struct SearchLimits {
    /// Number of fresh expanders tried before giving up.
    pub max_restarts: usize,
    /// Path states explored per booster search.
    pub rotation_budget: usize,
    /// Certification budget inside the solver; certification status is
    /// recorded but never gates progress.
    pub expander_budget: usize,
    pub time_limit: Option<Duration>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_restarts: 16,
            rotation_budget: 50_000,
            expander_budget: 200_000,
            time_limit: None,
        }
    }
}

/// Failure stages reported by the solvers; the strings are stable and are
/// what the experiment CSV carries in its `stage` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureStage {
    InfeasibleOrder,
    ExpanderBuild,
    Stalled,
    TimeLimit,
    VerificationFailed,
    NibbleFailed,
    DirectedSearchFailed,
    LiftFailed,
}

impl FailureStage {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureStage::InfeasibleOrder => "infeasible_order",
            FailureStage::ExpanderBuild => "expander_build",
            FailureStage::Stalled => "stalled",
            FailureStage::TimeLimit => "time_limit",
            FailureStage::VerificationFailed => "verification_failed",
            FailureStage::NibbleFailed => "nibble_failed",
            FailureStage::DirectedSearchFailed => "directed_search_failed",
            FailureStage::LiftFailed => "lift_failed",
        }
    }
}

#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Cycle(Cycle),
    Failed(FailureStage),
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    /// Path states expanded across all rotation searches.
    pub rotations_performed: usize,
    pub boosters_enumerated: usize,
    pub boosters_rejected_by_conflicts: usize,
    pub restarts: usize,
    pub elapsed: Duration,
    /// Certificate status of the last subgraph `R`, when one was built.
    pub expander_certificate: Option<ExpanderCertificate>,
}

impl SolveReport {
    pub fn success(&self) -> bool {
        matches!(self.outcome, SolveOutcome::Cycle(_))
    }

    pub fn cycle(&self) -> Option<&Cycle> {
        match &self.outcome {
            SolveOutcome::Cycle(c) => Some(c),
            SolveOutcome::Failed(_) => None,
        }
    }

    pub fn failure_stage(&self) -> Option<FailureStage> {
        match &self.outcome {
            SolveOutcome::Cycle(_) => None,
            SolveOutcome::Failed(stage) => Some(*stage),
        }
    }
}

/// Finds a Hamilton cycle of `graph` compatible with `system`.
///
/// Success is always verified: local systems in `Compatible` mode, global
/// ones in `Rainbow` mode. Failure is a diagnosis, not a certificate of
/// non-existence.
pub fn solve_constrained(
    graph: &Graph,
    system: &ConflictSystem,
    dout: &DOutParams,
    limits: &SearchLimits,
) -> SolveReport {
    let start = Instant::now();
    let mut report = SolveReport {
        outcome: SolveOutcome::Failed(FailureStage::ExpanderBuild),
        rotations_performed: 0,
        boosters_enumerated: 0,
        boosters_rejected_by_conflicts: 0,
        restarts: 0,
        elapsed: Duration::ZERO,
        expander_certificate: None,
    };
    if graph.n() < 3 {
        report.outcome = SolveOutcome::Failed(FailureStage::InfeasibleOrder);
        report.elapsed = start.elapsed();
        return report;
    }

    let mut rng = SplitMix64::new(dout.seed);
    let mut stage = FailureStage::ExpanderBuild;
    'epochs: for epoch in 0..limits.max_restarts.max(1) {
        report.restarts = epoch;
        if out_of_time(start, limits) {
            stage = FailureStage::TimeLimit;
            break;
        }

        // Compatible d-out sample; conflicting samples burn d-out retries.
        let r = match sample_compatible(graph, system, dout, &mut rng) {
            Some(r) => r,
            None => {
                stage = FailureStage::ExpanderBuild;
                continue;
            }
        };
        let mut cert_params = ExpanderParams::for_graph_order(graph.n());
        cert_params.enumeration_budget = limits.expander_budget;
        report.expander_certificate = Some(is_expander(&r, &cert_params));

        let mut path = initial_path(&r);
        maximize_path(&mut path, &r, limits, &mut report);
        stage = FailureStage::Stalled;

        loop {
            if out_of_time(start, limits) {
                stage = FailureStage::TimeLimit;
                break 'epochs;
            }
            if path.len() < 3 {
                break; // restart with a fresh R
            }
            let booster = compatible_booster(graph, system, &path, &r, limits, &mut report);
            let Some(booster) = booster else {
                break; // stall: no compatible booster in the closure
            };

            let cycle_order = cycle_from_booster(&path, &booster);
            if cycle_order.len() == graph.n() {
                let cycle = Cycle(cycle_order);
                let mode = match system.mode() {
                    Mode::Local => VerifyMode::Compatible,
                    Mode::Global => VerifyMode::Rainbow,
                };
                let verdict = verify_cycle(graph, system, &cycle, mode);
                report.elapsed = start.elapsed();
                if verdict.pass() {
                    report.outcome = SolveOutcome::Cycle(cycle);
                } else {
                    debug_assert!(false, "solver produced an invalid cycle: {verdict:?}");
                    report.outcome = SolveOutcome::Failed(FailureStage::VerificationFailed);
                }
                return report;
            }

            // Extend the cycle through an R-edge to an uncovered vertex.
            let Some(extended) = open_cycle_outward(&cycle_order, &r) else {
                break; // R leaves no exit from this cycle: restart
            };
            let previous_len = path.len();
            path = extended;
            maximize_path(&mut path, &r, limits, &mut report);
            debug_assert!(path.len() > previous_len, "booster step must grow the path");
        }
    }

    report.outcome = SolveOutcome::Failed(stage);
    report.elapsed = start.elapsed();
    report
}

fn out_of_time(start: Instant, limits: &SearchLimits) -> bool {
    limits
        .time_limit
        .is_some_and(|budget| start.elapsed() >= budget)
}

fn sample_compatible(
    graph: &Graph,
    system: &ConflictSystem,
    dout: &DOutParams,
    rng: &mut SplitMix64,
) -> Option<Graph> {
    for _ in 0..dout.max_retries.max(1) {
        let mut attempt_rng = rng.fork();
        let r = sample_d_out(graph, dout.d, &mut attempt_rng);
        if subgraph_compatible(graph, &r, system) {
            return Some(r);
        }
    }
    None
}

/// Greedy double-ended start: from the lowest vertex of positive degree,
/// repeatedly append the lowest unused neighbor at the tail, then at the
/// head.
fn initial_path(r: &Graph) -> Vec<VertexId> {
    let Some(start) = (0..r.n()).find(|&v| r.degree(v) > 0) else {
        return vec![0.min(r.n().saturating_sub(1))];
    };
    let mut used = vec![false; r.n()];
    let mut path = vec![start];
    used[start] = true;
    loop {
        let tail = *path.last().unwrap();
        if let Some(&w) = r.neighbors(tail).iter().find(|&&w| !used[w]) {
            path.push(w);
            used[w] = true;
            continue;
        }
        let head = path[0];
        if let Some(&w) = r.neighbors(head).iter().find(|&&w| !used[w]) {
            path.insert(0, w);
            used[w] = true;
            continue;
        }
        break;
    }
    path
}

/// Rotation-maximality: while some rotation-derived endpoint has an unused
/// `R`-neighbor, switch to that derived path and extend. The breadth-first
/// order and lowest-id extension make the result deterministic.
fn maximize_path(
    path: &mut Vec<VertexId>,
    r: &Graph,
    limits: &SearchLimits,
    report: &mut SolveReport,
) {
    'outer: loop {
        // Cheap direct extensions first.
        let mut used = vec![false; r.n()];
        for &v in path.iter() {
            used[v] = true;
        }
        loop {
            let tail = *path.last().unwrap();
            if let Some(&w) = r.neighbors(tail).iter().find(|&&w| !used[w]) {
                path.push(w);
                used[w] = true;
                continue;
            }
            let head = path[0];
            if let Some(&w) = r.neighbors(head).iter().find(|&&w| !used[w]) {
                path.insert(0, w);
                used[w] = true;
                continue;
            }
            break;
        }
        if path.len() < 3 || path.len() == r.n() {
            return;
        }

        // Search the rotation closure for a derived path whose endpoint can
        // leave V(P) through an R-edge.
        let u = UnionGraph::restricted_to_path(path, &[r]);
        let extendable = |candidate: (VertexId, VertexId)| -> Option<(usize, VertexId)> {
            for (side, end) in [candidate.0, candidate.1].into_iter().enumerate() {
                if let Some(&w) = r.neighbors(end).iter().find(|&&w| !used[w]) {
                    return Some((side, w));
                }
            }
            None
        };

        let mut seen = std::collections::HashSet::new();
        let mut queue = std::collections::VecDeque::new();
        let start_state = canonical_path(path.clone());
        seen.insert(start_state.clone());
        queue.push_back(start_state);
        let mut states = 0usize;
        while let Some(state) = queue.pop_front() {
            if states >= limits.rotation_budget {
                return;
            }
            states += 1;
            report.rotations_performed += 1;
            let ends = (state[0], *state.last().unwrap());
            if let Some((side, w)) = extendable(ends) {
                let mut next: Vec<VertexId> = if side == 0 {
                    state.iter().rev().copied().collect()
                } else {
                    state.clone()
                };
                next.push(w);
                *path = next;
                continue 'outer;
            }
            let reversed: Vec<VertexId> = state.iter().rev().copied().collect();
            for base in [&state, &reversed] {
                for next in rotations(&u, base) {
                    let next = canonical_path(next);
                    if seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
        return;
    }
}

fn canonical_path(mut p: Vec<VertexId>) -> Vec<VertexId> {
    if p.first() > p.last() {
        p.reverse();
    }
    p
}

/// Rotated successors of `path` at its tail using chords of `u`.
fn rotations(u: &UnionGraph, path: &[VertexId]) -> Vec<Vec<VertexId>> {
    let k = path.len();
    let tail = path[k - 1];
    let mut pos = std::collections::BTreeMap::new();
    for (i, &v) in path.iter().enumerate() {
        pos.insert(v, i);
    }
    let mut out = Vec::new();
    for w in u.neighbors(tail) {
        if let Some(&i) = pos.get(w) {
            if i + 2 <= k - 1 {
                let mut next = Vec::with_capacity(k);
                next.extend_from_slice(&path[..=i]);
                next.extend(path[i + 1..].iter().rev());
                out.push(next);
            }
        }
    }
    out
}

/// First booster (in deterministic closure order) whose host edge stays
/// compatible with every edge of `P ∪ R`.
fn compatible_booster(
    graph: &Graph,
    system: &ConflictSystem,
    path: &[VertexId],
    r: &Graph,
    limits: &SearchLimits,
    report: &mut SolveReport,
) -> Option<Booster> {
    let u = UnionGraph::restricted_to_path(path, &[r]);

    // Union edge ids incident to each vertex (local mode) or the used color
    // set (global mode), over the edges of P ∪ R.
    let union_edge_ids = union_edge_ids(graph, path, r);
    enum Filter {
        Local(Vec<Vec<EdgeId>>),
        Global(std::collections::HashSet<usize>),
    }
    let filter = match system.mode() {
        Mode::Local => {
            let mut incident = vec![Vec::new(); graph.n()];
            for &e in &union_edge_ids {
                let (a, b) = graph.endpoints(e);
                incident[a].push(e);
                incident[b].push(e);
            }
            Filter::Local(incident)
        }
        Mode::Global => Filter::Global(
            union_edge_ids
                .iter()
                .map(|&e| system.color(e).expect("global system colors every edge"))
                .collect(),
        ),
    };

    let accept = |pair: (VertexId, VertexId)| -> bool {
        let Some(e) = graph.edge_id(pair.0, pair.1) else {
            return false;
        };
        match &filter {
            Filter::Local(incident) => incident[pair.0]
                .iter()
                .chain(incident[pair.1].iter())
                .all(|&f| f == e || system.compatible(e, f)),
            Filter::Global(used) => {
                let color = system.color(e).expect("global system colors every edge");
                !used.contains(&color)
            }
        }
    };

    let (found, enumerated, rejected) =
        first_accepted_booster(path, &u, graph, limits.rotation_budget, accept);
    report.boosters_enumerated += enumerated;
    report.boosters_rejected_by_conflicts += rejected;
    report.rotations_performed += enumerated;
    found
}

fn union_edge_ids(graph: &Graph, path: &[VertexId], r: &Graph) -> Vec<EdgeId> {
    let mut ids: Vec<EdgeId> = r
        .edges()
        .iter()
        .map(|&(a, b)| graph.edge_id(a, b).expect("R is a subgraph of G"))
        .collect();
    for w in path.windows(2) {
        if !r.has_edge(w[0], w[1]) {
            ids.push(graph.edge_id(w[0], w[1]).expect("path edges lie in G"));
        }
    }
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// The booster's witness path plus the booster edge, as a cyclic order.
/// The witness spans `V(P)` with the booster joining its endpoints, which is
/// checked before use.
fn cycle_from_booster(path: &[VertexId], booster: &Booster) -> Vec<VertexId> {
    let w = &booster.witness;
    assert_eq!(w.len(), path.len(), "witness must span V(P)");
    let ends = (w[0].min(*w.last().unwrap()), w[0].max(*w.last().unwrap()));
    assert_eq!(ends, booster.pair, "witness endpoints must match the booster");
    let mut sorted_w: Vec<VertexId> = w.clone();
    let mut sorted_p: Vec<VertexId> = path.to_vec();
    sorted_w.sort_unstable();
    sorted_p.sort_unstable();
    assert_eq!(sorted_w, sorted_p, "witness vertex set must equal V(P)");
    w.clone()
}

/// Opens the cycle at a vertex with an `R`-neighbor outside it, yielding a
/// path one vertex longer. Returns None when `R` has no edge leaving the
/// cycle.
fn open_cycle_outward(cycle: &[VertexId], r: &Graph) -> Option<Vec<VertexId>> {
    let mut on_cycle = vec![false; r.n()];
    let mut pos_of = vec![usize::MAX; r.n()];
    for (i, &v) in cycle.iter().enumerate() {
        on_cycle[v] = true;
        pos_of[v] = i;
    }
    let mut best: Option<(VertexId, VertexId)> = None;
    for u in 0..r.n() {
        if on_cycle[u] {
            continue;
        }
        if let Some(&c) = r.neighbors(u).iter().find(|&&c| on_cycle[c]) {
            best = match best {
                Some(cur) if cur <= (u, c) => Some(cur),
                _ => Some((u, c)),
            };
        }
    }
    let (u, c) = best?;
    let k = cycle.len();
    let j = pos_of[c];
    let mut path = Vec::with_capacity(k + 1);
    path.push(u);
    for step in 0..k {
        path.push(cycle[(j + step) % k]);
    }
    Some(path)
}

/// Convenience wrapper rejecting invalid probabilities early; used by the
/// harness and CLI.
pub fn solve_constrained_checked(
    graph: &Graph,
    system: &ConflictSystem,
    dout: &DOutParams,
    limits: &SearchLimits,
) -> Result<SolveReport> {
    if graph.n() < 3 {
        return Err(Error::InvalidGraph(
            "a Hamilton cycle needs at least 3 vertices".into(),
        ));
    }
    Ok(solve_constrained(graph, system, dout, limits))
}
