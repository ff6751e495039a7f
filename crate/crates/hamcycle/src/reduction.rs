//! Reduction of constrained Hamiltonicity to directed Hamiltonicity.
//!
//! A perfect matching turns the graph into a digraph on the matching
//! elements: an arc `(i, j)` records that `{b_i, a_j}` is a graph edge, so a
//! directed Hamilton cycle spells out an alternating Hamilton cycle of the
//! original graph. Pruning removes exactly the arcs whose linking edge
//! conflicts with one of the two matching edges it touches, which makes the
//! lift of any directed Hamilton cycle of the pruned digraph compatible.

use std::time::Instant;

use crate::conflict::ConflictSystem;
use crate::directed::{directed_hamilton, DirectedLimits, DirectedOutcome};
use crate::error::{Error, Result};
use crate::graph::{Cycle, Digraph, Graph, VertexId};
use crate::nibble::{nibble_matching, NibbleParams, PerfectMatching};
use crate::posa::{FailureStage, SearchLimits, SolveOutcome, SolveReport};
use crate::verify::{verify_cycle, VerifyMode};

/// The digraph on matching elements: arc `(i, j)` iff `{b_i, a_j}` is a
/// graph edge and `i != j`.
pub fn build_digraph(graph: &Graph, matching: &PerfectMatching) -> Digraph {
    let k = matching.len();
    let mut arcs = Vec::new();
    for i in 0..k {
        let from = matching.b(i);
        for j in 0..k {
            if i != j && graph.has_edge(from, matching.a(j)) {
                arcs.push((i, j));
            }
        }
    }
    Digraph::new(k, arcs).expect("element digraph is simple by construction")
}

/// Removes every arc `(i, j)` whose linking edge `{b_i, a_j}` is
/// incompatible with the matching edge at `b_i` or with the matching edge at
/// `a_j`. For odd orders with an incompatible triple, the triple element is
/// isolated entirely.
pub fn prune_digraph(
    d: &Digraph,
    graph: &Graph,
    matching: &PerfectMatching,
    system: &ConflictSystem,
) -> Digraph {
    let k = matching.len();
    let edge_id_of = |(u, v): (VertexId, VertexId)| {
        graph
            .edge_id(u, v)
            .expect("matching edges are graph edges")
    };

    let mut isolated = vec![false; k];
    if let Some(t) = matching.triple_index() {
        let first = edge_id_of(matching.edge_at_a(t));
        let second = edge_id_of(matching.edge_at_b(t));
        if !system.compatible(first, second) {
            isolated[t] = true;
        }
    }

    let arcs = d.arcs().filter(|&(i, j)| {
        if isolated[i] || isolated[j] {
            return false;
        }
        let link = edge_id_of((matching.b(i), matching.a(j)));
        let at_tail = edge_id_of(matching.edge_at_b(i));
        let at_head = edge_id_of(matching.edge_at_a(j));
        system.compatible(link, at_tail) && system.compatible(link, at_head)
    });
    Digraph::new(k, arcs).expect("pruning preserves the vertex set")
}

#[derive(Debug, Clone)]
pub struct TypicalityReport {
    pub epsilon: f64,
    pub graph_min_degree: usize,
    /// `(1/2 + epsilon) * min_degree / 2`.
    pub threshold: f64,
    pub min_in_degree: usize,
    pub min_in_vertex: VertexId,
    pub min_out_degree: usize,
    pub min_out_vertex: VertexId,
    pub typical: bool,
}

/// Compares the pruned digraph's degree minima against
/// `(1/2 + epsilon) * delta(G) / 2`.
pub fn typicality_report(pruned: &Digraph, graph: &Graph, epsilon: f64) -> TypicalityReport {
    let delta_g = graph.min_degree();
    let threshold = (0.5 + epsilon) * delta_g as f64 / 2.0;
    let (min_in_vertex, min_in_degree) = pruned.min_in_degree().unwrap_or((0, 0));
    let (min_out_vertex, min_out_degree) = pruned.min_out_degree().unwrap_or((0, 0));
    TypicalityReport {
        epsilon,
        graph_min_degree: delta_g,
        threshold,
        min_in_degree,
        min_in_vertex,
        min_out_degree,
        min_out_vertex,
        typical: min_in_degree as f64 >= threshold && min_out_degree as f64 >= threshold,
    }
}

/// Spells out the Hamilton cycle of the original graph encoded by a directed
/// Hamilton cycle over matching elements: element `i` contributes
/// `a_i, b_i` (with `v*` between them for the triple), and consecutive
/// elements are joined by their linking edges.
pub fn lift_cycle(dcycle: &[usize], matching: &PerfectMatching) -> Result<Cycle> {
    let k = matching.len();
    if dcycle.len() != k {
        return Err(Error::InvalidDigraph(format!(
            "directed cycle visits {} of {k} elements",
            dcycle.len()
        )));
    }
    let mut seen = vec![false; k];
    for &i in dcycle {
        if i >= k {
            return Err(Error::InvalidDigraph(format!("element {i} out of range")));
        }
        if seen[i] {
            return Err(Error::InvalidDigraph(format!("element {i} visited twice")));
        }
        seen[i] = true;
    }
    let mut vertices = Vec::with_capacity(2 * k + 1);
    for &i in dcycle {
        vertices.extend(matching.element_vertices(i));
    }
    Ok(Cycle(vertices))
}

/// The dense pipeline: nibble out a perfect matching, reduce, prune, search
/// the pruned digraph, and lift. The typicality report is diagnostic and
/// never gates the search. Every success is verified before being returned.
pub fn solve_dense(
    graph: &Graph,
    system: &ConflictSystem,
    params: &NibbleParams,
    limits: &SearchLimits,
) -> SolveReport {
    let start = Instant::now();
    let mut report = SolveReport {
        outcome: SolveOutcome::Failed(FailureStage::NibbleFailed),
        rotations_performed: 0,
        boosters_enumerated: 0,
        boosters_rejected_by_conflicts: 0,
        restarts: 0,
        elapsed: std::time::Duration::ZERO,
        expander_certificate: None,
    };
    if graph.n() < 4 {
        report.outcome = SolveOutcome::Failed(FailureStage::InfeasibleOrder);
        report.elapsed = start.elapsed();
        return report;
    }

    let (matching, trace) = match nibble_matching(graph, system, params) {
        Ok(ok) => ok,
        Err(failure) => {
            report.restarts = failure.attempts;
            report.elapsed = start.elapsed();
            return report;
        }
    };
    report.restarts = trace.attempt;

    let digraph = build_digraph(graph, &matching);
    let pruned = prune_digraph(&digraph, graph, &matching, system);

    let mut dlimits = DirectedLimits::default();
    dlimits.seed = params.seed ^ 0x9E37_79B9;
    dlimits.rotation_budget = limits.rotation_budget;
    dlimits.restarts = limits.max_restarts.max(8);
    let outcome = directed_hamilton(&pruned, &dlimits);

    let dcycle = match outcome {
        DirectedOutcome::Found(c) => c,
        _ => {
            report.outcome = SolveOutcome::Failed(FailureStage::DirectedSearchFailed);
            report.elapsed = start.elapsed();
            return report;
        }
    };

    let cycle = match lift_cycle(&dcycle, &matching) {
        Ok(c) => c,
        Err(_) => {
            report.outcome = SolveOutcome::Failed(FailureStage::LiftFailed);
            report.elapsed = start.elapsed();
            return report;
        }
    };
    // The reduction guarantees compatibility of consecutive cycle edges; in
    // global mode that is the properly-colored guarantee, not the rainbow
    // one, so verification always runs in compatible mode here.
    let verdict = verify_cycle(graph, system, &cycle, VerifyMode::Compatible);
    report.elapsed = start.elapsed();
    if verdict.pass() {
        report.outcome = SolveOutcome::Cycle(cycle);
    } else {
        debug_assert!(false, "lifted cycle failed verification: {verdict:?}");
        report.outcome = SolveOutcome::Failed(FailureStage::VerificationFailed);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn matching_of(graph: &Graph, pairs: Vec<(usize, usize)>, hub: Option<usize>) -> PerfectMatching {
        PerfectMatching::new(graph, pairs, hub).unwrap()
    }

    #[test]
    fn arc_follows_linking_edge() {
        // Elements (0,1) and (2,3); the only linking edge is {1, 2}, so the
        // digraph has exactly the arc 0 -> 1.
        let g = Graph::new(4, vec![(0, 1), (2, 3), (1, 2)]).unwrap();
        let m = matching_of(&g, vec![(0, 1), (2, 3)], None);
        let d = build_digraph(&g, &m);
        assert!(d.has_arc(0, 1));
        assert!(!d.has_arc(1, 0));
        assert_eq!(d.arc_count(), 1);
    }

    #[test]
    fn complete_graph_gives_complete_digraph() {
        let g = Graph::complete(10);
        let m = matching_of(&g, vec![(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)], None);
        let d = build_digraph(&g, &m);
        assert_eq!(d.arc_count(), 5 * 4);
    }

    #[test]
    fn arc_count_matches_brute_force() {
        let g = Graph::gen_gnp(40, 0.4, 3).unwrap();
        // Build a valid matching on top of gnp by adding its edges.
        let mut edges: std::collections::BTreeSet<(usize, usize)> =
            g.edges().iter().copied().collect();
        let mut rng = SplitMix64::new(9);
        let mut order: Vec<usize> = (0..40).collect();
        rng.shuffle(&mut order);
        let pairs: Vec<(usize, usize)> =
            (0..20).map(|i| (order[2 * i], order[2 * i + 1])).collect();
        for &(a, b) in &pairs {
            edges.insert((a.min(b), a.max(b)));
        }
        let g = Graph::new(40, edges).unwrap();
        let m = matching_of(&g, pairs, None);
        let d = build_digraph(&g, &m);
        let mut expected = 0;
        for i in 0..20 {
            for j in 0..20 {
                if i != j && g.has_edge(m.b(i), m.a(j)) {
                    expected += 1;
                }
            }
        }
        assert_eq!(d.arc_count(), expected);
    }

    #[test]
    fn empty_system_prunes_nothing() {
        let g = Graph::complete(8);
        let m = matching_of(&g, vec![(0, 1), (2, 3), (4, 5), (6, 7)], None);
        let d = build_digraph(&g, &m);
        let s = ConflictSystem::empty_local(&g);
        let pruned = prune_digraph(&d, &g, &m, &s);
        assert_eq!(pruned.arc_count(), d.arc_count());
    }

    #[test]
    fn conflicting_link_removes_arc() {
        // Arc (0, 1) carries linking edge {1, 2}; forbid it against the
        // matching edge {0, 1} at their shared vertex 1.
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = matching_of(&g, vec![(0, 1), (2, 3)], None);
        let d = build_digraph(&g, &m);
        assert!(d.has_arc(0, 1));
        let e01 = g.edge_id(0, 1).unwrap();
        let e12 = g.edge_id(1, 2).unwrap();
        let s = ConflictSystem::local_from_pairs(&g, vec![(1, e01, e12)]).unwrap();
        let pruned = prune_digraph(&d, &g, &m, &s);
        assert!(!pruned.has_arc(0, 1));
    }

    #[test]
    fn incompatible_triple_is_isolated() {
        // Order 5: elements (0,1), (2,4) with hub 3. Forbid the two triple
        // edges {2,3}, {3,4} against each other at vertex 3.
        let g = Graph::complete(5);
        let m = matching_of(&g, vec![(0, 1), (2, 4)], Some(3));
        let d = build_digraph(&g, &m);
        let e23 = g.edge_id(2, 3).unwrap();
        let e34 = g.edge_id(3, 4).unwrap();
        let s = ConflictSystem::local_from_pairs(&g, vec![(3, e23, e34)]).unwrap();
        let pruned = prune_digraph(&d, &g, &m, &s);
        assert_eq!(pruned.in_degree(1), 0);
        assert_eq!(pruned.out_degree(1), 0);
    }

    #[test]
    fn pruning_only_shrinks() {
        let g = Graph::gen_gnp(30, 0.5, 21).unwrap();
        let mut edges: std::collections::BTreeSet<(usize, usize)> =
            g.edges().iter().copied().collect();
        let pairs: Vec<(usize, usize)> = (0..15).map(|i| (2 * i, 2 * i + 1)).collect();
        for &(a, b) in &pairs {
            edges.insert((a.min(b), a.max(b)));
        }
        let g = Graph::new(30, edges).unwrap();
        let m = matching_of(&g, pairs, None);
        let d = build_digraph(&g, &m);
        let s = ConflictSystem::random_bounded(&g, 3, 5);
        let pruned = prune_digraph(&d, &g, &m, &s);
        assert!(pruned.arc_count() <= d.arc_count());
        for v in 0..15 {
            assert!(pruned.in_degree(v) <= d.in_degree(v));
            assert!(pruned.out_degree(v) <= d.out_degree(v));
            for &w in pruned.out_neighbors(v) {
                assert!(d.has_arc(v, w), "pruning cannot add arcs");
            }
        }
    }

    #[test]
    fn typicality_thresholds() {
        // Min in/out degree 40 against delta(G) = 100 and epsilon = 0.1:
        // threshold 30, so the report says typical.
        let g = Graph::complete(101); // delta = 100
        let mut arcs = Vec::new();
        for i in 0..50usize {
            for j in 0..50usize {
                if i != j && (j + 50 - i) % 50 <= 40 && (j + 50 - i) % 50 >= 1 {
                    arcs.push((i, j));
                }
            }
        }
        let d = Digraph::new(50, arcs).unwrap();
        assert_eq!(d.min_in_degree().unwrap().1, 40);
        let report = typicality_report(&d, &g, 0.1);
        assert_eq!(report.threshold, 30.0);
        assert!(report.typical);
        // An isolated vertex is never typical when delta(G) > 0.
        let mut arcs2 = Vec::new();
        for i in 1..50usize {
            for j in 1..50usize {
                if i != j {
                    arcs2.push((i, j));
                }
            }
        }
        let d2 = Digraph::new(50, arcs2).unwrap();
        assert!(!typicality_report(&d2, &g, 0.1).typical);
    }

    #[test]
    fn lift_two_elements() {
        let g = Graph::cycle(4);
        let m = matching_of(&g, vec![(0, 1), (2, 3)], None);
        let cycle = lift_cycle(&[0, 1], &m).unwrap();
        assert_eq!(cycle.vertices(), &[0, 1, 2, 3]);
    }

    #[test]
    fn lift_inserts_hub_in_triple() {
        let g = Graph::complete(5);
        let m = matching_of(&g, vec![(0, 1), (2, 4)], Some(3));
        let cycle = lift_cycle(&[0, 1], &m).unwrap();
        assert_eq!(cycle.vertices(), &[0, 1, 2, 3, 4]);
        assert!(lift_cycle(&[0], &m).is_err());
        assert!(lift_cycle(&[0, 0], &m).is_err());
    }

    #[test]
    fn dense_complete_graph_solves() {
        let g = Graph::complete(12);
        let s = ConflictSystem::empty_local(&g);
        let mut params = NibbleParams::desk(1.6, 0.1, 2, 3);
        params.restart_cap = 10_000;
        let report = solve_dense(&g, &s, &params, &SearchLimits::default());
        let cycle = report.cycle().expect("complete graphs reduce to complete digraphs");
        assert!(verify_cycle(&g, &s, cycle, VerifyMode::Compatible).pass());
    }

    #[test]
    fn dense_star_killer_never_lies() {
        let g = Graph::complete(10);
        let s = ConflictSystem::star_killer(&g, 0);
        let mut params = NibbleParams::desk(1.6, 0.1, 2, 5);
        params.restart_cap = 200;
        let report = solve_dense(&g, &s, &params, &SearchLimits::default());
        assert!(!report.success());
    }

    #[test]
    fn dense_seeded_instance_verifies() {
        let g = Graph::gen_gnp(200, 0.3, 31).unwrap();
        let np = 200.0 * 0.3;
        let s = ConflictSystem::random_bounded(&g, (0.25 * np) as usize, 33);
        let mut params = NibbleParams::desk(0.8, 0.05, 6, 35);
        params.restart_cap = 50;
        let report = solve_dense(&g, &s, &params, &SearchLimits::default());
        let cycle = report.cycle().expect("dense instance should solve");
        assert!(verify_cycle(&g, &s, cycle, VerifyMode::Compatible).pass());
    }
}
