//! Per-round diagnostics for the matching process.
//!
//! The five conditions compare the evolving bipartite state against its
//! nominal decay: with retention probability `q = keep_prob * p` and
//! per-round survival `1 - delta`, sizes, degrees and compatible
//! neighborhoods should all track `(1 - delta)^i` within the window
//! `xi_i = delta * (1 + 21 * eps^{-1} * delta)^i`. Condition (v) counts
//! bad interactions between a fixed edge and the round-`i` matching: an
//! edge `e' = {a', b'}` is A-bad for `e = {a, b}` when `{a, b'}` is a graph
//! edge compatible with `e` but incompatible with `e'` (B-bad swaps the
//! roles). All conditions are reported with measured extremes; nothing here
//! gates any solver.

use std::collections::BTreeSet;

use crate::conflict::ConflictSystem;
use crate::graph::{Graph, VertexId};
use crate::nibble::{NibbleParams, NibbleTrace};
use crate::rng::SplitMix64;

/// The exact window sequence `xi_i = delta (1 + 21 eps^{-1} delta)^i`.
pub fn xi_window(epsilon: f64, delta: f64, rounds: usize) -> Vec<f64> {
    let growth = 1.0 + 21.0 * delta / epsilon;
    (0..=rounds).map(|i| delta * growth.powi(i as i32)).collect()
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    /// Condition index, 1 through 5.
    pub index: usize,
    pub pass: bool,
    /// Worst relative deviation observed (measured / nominal - 1, or the
    /// exceedance ratio for condition (v)).
    pub worst_deviation: f64,
    /// Round where the worst deviation occurred.
    pub worst_round: usize,
    pub checked: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct NormalityReport {
    pub conditions: Vec<ConditionReport>,
    pub xi: Vec<f64>,
    /// Measured bound of the system divided by `n p`; stands in for the
    /// hypothesis parameter of condition (v).
    pub mu_hat: f64,
    pub q: f64,
}

impl NormalityReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }
}

/// Whether `e_prime` is A-bad for `e`, where `e = (a, b)` and
/// `e_prime = (a_prime, b_prime)` are oriented with their first endpoint on
/// the A side.
pub fn is_a_bad(
    graph: &Graph,
    system: &ConflictSystem,
    e: (VertexId, VertexId),
    e_prime: (VertexId, VertexId),
) -> bool {
    let (a, b) = e;
    let (_, b_prime) = e_prime;
    let Some(cross) = graph.edge_id(a, b_prime) else {
        return false;
    };
    let Some(e_id) = graph.edge_id(a, b) else {
        return false;
    };
    let Some(ep_id) = graph.edge_id(e_prime.0, e_prime.1) else {
        return false;
    };
    if cross == e_id || cross == ep_id {
        return false;
    }
    system.compatible(cross, e_id) && !system.compatible(cross, ep_id)
}

/// Whether `e_prime` is B-bad for `e`: the mirrored condition through
/// `{b, a'}`.
pub fn is_b_bad(
    graph: &Graph,
    system: &ConflictSystem,
    e: (VertexId, VertexId),
    e_prime: (VertexId, VertexId),
) -> bool {
    let (a, b) = e;
    let (a_prime, _) = e_prime;
    let Some(cross) = graph.edge_id(b, a_prime) else {
        return false;
    };
    let Some(e_id) = graph.edge_id(a, b) else {
        return false;
    };
    let Some(ep_id) = graph.edge_id(e_prime.0, e_prime.1) else {
        return false;
    };
    if cross == e_id || cross == ep_id {
        return false;
    }
    system.compatible(cross, e_id) && !system.compatible(cross, ep_id)
}

/// Evaluates normality conditions (i)-(v) on a completed trace.
///
/// `p` is the edge probability of the host graph (used for the degree
/// nominals); conditions (iv) and (v) are evaluated on `sample_size`
/// crossing edges drawn with `sample_seed`, or exhaustively when
/// `sample_size` is `usize::MAX`.
pub fn normality_check(
    graph: &Graph,
    system: &ConflictSystem,
    trace: &NibbleTrace,
    params: &NibbleParams,
    p: f64,
    sample_size: usize,
    sample_seed: u64,
) -> std::result::Result<NormalityReport, crate::error::Error> {
    let (epsilon, delta, _) = params.resolve()?;
    let rounds_run = trace.rows.len();
    let xi = xi_window(epsilon, delta, rounds_run);
    let q = trace.keep_prob * p;
    let n0 = trace
        .snapshots
        .first()
        .map(|s| s.side_b.len())
        .unwrap_or(0);
    let mu_hat = system.max_bound().max_bound as f64 / (graph.n() as f64 * p);

    let mut conditions = Vec::new();

    // (i) side sizes track (1 - delta)^i n0.
    {
        let mut worst = 0.0f64;
        let mut worst_round = 0;
        let mut pass = true;
        for (i, snap) in trace.snapshots.iter().enumerate().take(rounds_run + 1) {
            let nominal = (1.0 - delta).powi(i as i32) * n0 as f64;
            for size in [snap.side_b.len(), snap.side_a.len() - (graph.n() % 2)] {
                let dev = (size as f64 - nominal).abs() / n0 as f64;
                if dev > worst {
                    worst = dev;
                    worst_round = i;
                }
                if dev > xi[i] {
                    pass = false;
                }
            }
        }
        conditions.push(ConditionReport {
            index: 1,
            pass,
            worst_deviation: worst,
            worst_round,
            checked: rounds_run + 1,
            skipped: 0,
        });
    }

    // (ii) working-graph degrees track (1 - delta)^i n0 q.
    {
        let mut worst = 0.0f64;
        let mut worst_round = 0;
        let mut pass = true;
        for (i, snap) in trace.snapshots.iter().enumerate().take(rounds_run + 1) {
            let nominal = (1.0 - delta).powi(i as i32) * n0 as f64 * q;
            let mut deg = vec![0usize; graph.n()];
            for &(x, y) in &snap.edges {
                deg[x] += 1;
                deg[y] += 1;
            }
            for &v in snap.side_a.iter().chain(snap.side_b.iter()) {
                let dev = (deg[v] as f64 - nominal).abs() / (n0 as f64 * q);
                if dev > worst {
                    worst = dev;
                    worst_round = i;
                }
                if dev > xi[i] {
                    pass = false;
                }
            }
        }
        conditions.push(ConditionReport {
            index: 2,
            pass,
            worst_deviation: worst,
            worst_round,
            checked: rounds_run + 1,
            skipped: 0,
        });
    }

    // (iii) host-graph degrees into each side track (1 - delta)^i n0 p.
    {
        let mut worst = 0.0f64;
        let mut worst_round = 0;
        let mut pass = true;
        for (i, snap) in trace.snapshots.iter().enumerate().take(rounds_run + 1) {
            let nominal = (1.0 - delta).powi(i as i32) * n0 as f64 * p;
            let mut in_a = vec![false; graph.n()];
            let mut in_b = vec![false; graph.n()];
            for &v in &snap.side_a {
                in_a[v] = true;
            }
            for &v in &snap.side_b {
                in_b[v] = true;
            }
            for v in 0..graph.n() {
                let (mut to_a, mut to_b) = (0usize, 0usize);
                for &w in graph.neighbors(v) {
                    if in_a[w] {
                        to_a += 1;
                    }
                    if in_b[w] {
                        to_b += 1;
                    }
                }
                for side in [to_a, to_b] {
                    let dev = (side as f64 - nominal).abs() / (n0 as f64 * p);
                    if dev > worst {
                        worst = dev;
                        worst_round = i;
                    }
                    if dev > xi[i] {
                        pass = false;
                    }
                }
            }
        }
        conditions.push(ConditionReport {
            index: 3,
            pass,
            worst_deviation: worst,
            worst_round,
            checked: rounds_run + 1,
            skipped: 0,
        });
    }

    // Crossing edges of the initial bisection, oriented (A side, B side),
    // for conditions (iv) and (v).
    let (sampled_edges, skipped_non_crossing) = {
        let snap0 = trace.snapshots.first();
        let mut in_a = vec![false; graph.n()];
        let mut in_b = vec![false; graph.n()];
        if let Some(s) = snap0 {
            for &v in &s.side_a {
                in_a[v] = true;
            }
            for &v in &s.side_b {
                in_b[v] = true;
            }
        }
        let mut crossing: Vec<(VertexId, VertexId)> = Vec::new();
        let mut skipped = 0usize;
        for &(u, v) in graph.edges() {
            if in_a[u] && in_b[v] {
                crossing.push((u, v));
            } else if in_a[v] && in_b[u] {
                crossing.push((v, u));
            } else {
                skipped += 1;
            }
        }
        if sample_size != usize::MAX && crossing.len() > sample_size {
            let mut rng = SplitMix64::new(sample_seed);
            rng.shuffle(&mut crossing);
            crossing.truncate(sample_size);
            crossing.sort_unstable();
        }
        (crossing, skipped)
    };

    // (iv) compatible-neighborhood sets track their initial sizes. For an
    // oriented edge e = (a, b), the A-side compatible set holds the x with
    // {b, x} a host edge compatible with e; the H variants use the round-0
    // working graph.
    {
        let snap0 = &trace.snapshots[0];
        let h0: BTreeSet<(VertexId, VertexId)> = snap0.edges.iter().copied().collect();
        let has_h0 = |a: VertexId, b: VertexId| h0.contains(&(a, b));
        let mut worst = 0.0f64;
        let mut worst_round = 0;
        let mut pass = true;
        let mut checked = 0usize;
        let mut skipped = skipped_non_crossing;
        for &(a, b) in &sampled_edges {
            let e_id = graph.edge_id(a, b).expect("crossing edges are edges");
            // Full compatible sets over the initial bisection.
            let mut a_set_g: Vec<VertexId> = Vec::new();
            let mut b_set_g: Vec<VertexId> = Vec::new();
            let mut a_set_h: Vec<VertexId> = Vec::new();
            let mut b_set_h: Vec<VertexId> = Vec::new();
            for &x in graph.neighbors(b) {
                if x == a {
                    continue;
                }
                let f = graph.edge_id(b, x).unwrap();
                if snap0.side_a.binary_search(&x).is_ok() && system.compatible(e_id, f) {
                    a_set_g.push(x);
                    if has_h0(x, b) {
                        a_set_h.push(x);
                    }
                }
            }
            for &y in graph.neighbors(a) {
                if y == b {
                    continue;
                }
                let f = graph.edge_id(a, y).unwrap();
                if snap0.side_b.binary_search(&y).is_ok() && system.compatible(e_id, f) {
                    b_set_g.push(y);
                    if has_h0(a, y) {
                        b_set_h.push(y);
                    }
                }
            }
            for (i, snap) in trace.snapshots.iter().enumerate().take(rounds_run + 1) {
                let survival = (1.0 - delta).powi(i as i32);
                let a_alive: BTreeSet<_> = snap.side_a.iter().copied().collect();
                let b_alive: BTreeSet<_> = snap.side_b.iter().copied().collect();
                for (base, alive) in [
                    (&a_set_g, &a_alive),
                    (&a_set_h, &a_alive),
                    (&b_set_g, &b_alive),
                    (&b_set_h, &b_alive),
                ] {
                    if base.is_empty() {
                        skipped += 1;
                        continue;
                    }
                    checked += 1;
                    let inter = base.iter().filter(|x| alive.contains(x)).count();
                    let dev = (inter as f64 - survival * base.len() as f64) / base.len() as f64;
                    let dev = dev.abs();
                    if dev > worst {
                        worst = dev;
                        worst_round = i;
                    }
                    if dev > xi[i] {
                        pass = false;
                    }
                }
            }
        }
        conditions.push(ConditionReport {
            index: 4,
            pass,
            worst_deviation: worst,
            worst_round,
            checked,
            skipped,
        });
    }

    // (v) bad-edge counts in each round's matching stay below
    // (mu_hat + eps/3) delta (1-delta)^{i-1} |B_e| (and the A/B mirror).
    {
        let snap0 = &trace.snapshots[0];
        let mut worst = 0.0f64;
        let mut worst_round = 0;
        let mut pass = true;
        let mut checked = 0usize;
        let mut skipped = 0usize;
        for &(a, b) in &sampled_edges {
            let e_id = graph.edge_id(a, b).expect("crossing edges are edges");
            let mut a_size = 0usize;
            let mut b_size = 0usize;
            for &x in graph.neighbors(b) {
                if x != a
                    && snap0.side_a.binary_search(&x).is_ok()
                    && system.compatible(e_id, graph.edge_id(b, x).unwrap())
                {
                    a_size += 1;
                }
            }
            for &y in graph.neighbors(a) {
                if y != b
                    && snap0.side_b.binary_search(&y).is_ok()
                    && system.compatible(e_id, graph.edge_id(a, y).unwrap())
                {
                    b_size += 1;
                }
            }
            for (i, kept) in trace.kept_sets.iter().enumerate() {
                let round = i + 1; // condition applies to M_{i} at index i+1
                let mut a_bad = 0usize;
                let mut b_bad = 0usize;
                for &(x, y) in kept {
                    if is_a_bad(graph, system, (a, b), (x, y)) {
                        a_bad += 1;
                    }
                    if is_b_bad(graph, system, (a, b), (x, y)) {
                        b_bad += 1;
                    }
                }
                let decay = delta * (1.0 - delta).powi(i as i32);
                let budget_a = (mu_hat + epsilon / 3.0) * decay * b_size as f64;
                let budget_b = (mu_hat + epsilon / 3.0) * decay * a_size as f64;
                for (bad, budget) in [(a_bad, budget_a), (b_bad, budget_b)] {
                    if budget == 0.0 {
                        if bad > 0 {
                            pass = false;
                            worst = f64::INFINITY;
                            worst_round = round;
                        } else {
                            skipped += 1;
                        }
                        continue;
                    }
                    checked += 1;
                    let ratio = bad as f64 / budget;
                    if ratio > worst {
                        worst = ratio;
                        worst_round = round;
                    }
                    if bad as f64 > budget {
                        pass = false;
                    }
                }
            }
        }
        conditions.push(ConditionReport {
            index: 5,
            pass,
            worst_deviation: worst,
            worst_round,
            checked,
            skipped,
        });
    }

    Ok(NormalityReport {
        conditions,
        xi,
        mu_hat,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nibble::nibble_matching;

    #[test]
    fn xi_is_exact() {
        let xi = xi_window(0.4, 0.05, 3);
        let growth: f64 = 1.0 + 21.0 * 0.05 / 0.4;
        assert_eq!(xi[0], 0.05);
        assert!((xi[1] - 0.05 * growth).abs() < 1e-15);
        assert!((xi[3] - 0.05 * growth.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn round_zero_sizes_hold_exactly() {
        // At i = 0 the sizes equal n0 by definition, so condition (i) is
        // within xi_0 = delta there no matter the seed.
        let g = Graph::gen_gnp(120, 0.4, 3).unwrap();
        let s = ConflictSystem::empty_local(&g);
        let mut params = NibbleParams::desk(1.2, 0.1, 2, 9);
        params.restart_cap = 500;
        let (_, trace) = nibble_matching(&g, &s, &params).unwrap();
        let report = normality_check(&g, &s, &trace, &params, 0.4, 64, 1).unwrap();
        assert_eq!(report.conditions.len(), 5);
        // Round 0 contributes zero deviation to condition (i).
        let snap0 = &trace.snapshots[0];
        assert_eq!(snap0.side_b.len() + g.n() % 2, snap0.side_a.len());
    }

    #[test]
    fn handcrafted_a_bad_instance() {
        // e = {a, b} = {0, 3}, e' = {1, 4}; the cross edge {0, 4} is present
        // and compatible with e but incompatible with e', so e' is A-bad
        // for e. Vertices 0..3 are the A side.
        let g = Graph::new(6, vec![(0, 3), (1, 4), (0, 4), (2, 5)]).unwrap();
        let cross = g.edge_id(0, 4).unwrap();
        let ep = g.edge_id(1, 4).unwrap();
        let s = ConflictSystem::local_from_pairs(&g, vec![(4, cross, ep)]).unwrap();
        assert!(is_a_bad(&g, &s, (0, 3), (1, 4)));
        assert!(!is_b_bad(&g, &s, (0, 3), (1, 4)));
        // With an empty system nothing is bad.
        let empty = ConflictSystem::empty_local(&g);
        assert!(!is_a_bad(&g, &empty, (0, 3), (1, 4)));
    }

    #[test]
    fn report_runs_on_seeded_instance() {
        let g = Graph::gen_gnp(300, 0.2, 5).unwrap();
        let s = ConflictSystem::random_bounded(&g, 10, 7);
        let mut params = NibbleParams::desk(1.2, 0.05, 4, 11);
        params.restart_cap = 200;
        let (_, trace) = nibble_matching(&g, &s, &params).unwrap();
        let report = normality_check(&g, &s, &trace, &params, 0.2, 32, 13).unwrap();
        assert_eq!(report.xi.len(), 5);
        assert!(report.mu_hat >= 0.0);
        // Deterministic given identical inputs.
        let report2 = normality_check(&g, &s, &trace, &params, 0.2, 32, 13).unwrap();
        for (c1, c2) in report.conditions.iter().zip(report2.conditions.iter()) {
            assert_eq!(c1.pass, c2.pass);
            assert_eq!(c1.worst_deviation, c2.worst_deviation);
        }
    }
}
