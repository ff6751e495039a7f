//! Independent brute-force-leaning oracles.
//!
//! Nothing in this module shares search machinery with the solvers: cycles
//! are checked step by step against the graph and the conflict system, and
//! the brute-force searches enumerate candidate structures directly. Every
//! solver success must pass [`verify_cycle`] in the appropriate mode before
//! it is reported.

use std::collections::BTreeSet;

use crate::conflict::{ColorId, ConflictSystem};
use crate::error::{Error, Result};
use crate::graph::{Cycle, Digraph, Graph, Path, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// The cycle visits every vertex exactly once over graph edges.
    HamiltonianOnly,
    /// Additionally, every pair of consecutive cycle edges is compatible.
    Compatible,
    /// Additionally, all cycle-edge colors are distinct (global systems).
    Rainbow,
}

/// Violation witnesses; `pass` holds exactly when the list is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongVertexCount { expected: usize, got: usize },
    MissingVertex(VertexId),
    RepeatedVertex(VertexId),
    UnknownVertex(VertexId),
    NonEdgeStep(VertexId, VertexId),
    ConflictingPair {
        vertex: VertexId,
        first: (VertexId, VertexId),
        second: (VertexId, VertexId),
    },
    RepeatedColor {
        color: ColorId,
        first: (VertexId, VertexId),
        second: (VertexId, VertexId),
    },
    RainbowNeedsColors,
    DegenerateCycle { length: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a cyclic vertex sequence against `graph` and `system`.
///
/// All failures are reported as violations; the call itself never errors.
pub fn verify_cycle(
    graph: &Graph,
    system: &ConflictSystem,
    cycle: &Cycle,
    mode: VerifyMode,
) -> Verdict {
    let mut violations = Vec::new();
    let vs = cycle.vertices();

    if vs.len() != graph.n() {
        violations.push(Violation::WrongVertexCount {
            expected: graph.n(),
            got: vs.len(),
        });
    }
    if vs.len() < 3 {
        violations.push(Violation::DegenerateCycle { length: vs.len() });
        return Verdict { violations };
    }

    let mut seen = vec![false; graph.n()];
    for &v in vs {
        if v >= graph.n() {
            violations.push(Violation::UnknownVertex(v));
            return Verdict { violations };
        }
        if seen[v] {
            violations.push(Violation::RepeatedVertex(v));
        }
        seen[v] = true;
    }
    for v in 0..graph.n() {
        if !seen[v] {
            violations.push(Violation::MissingVertex(v));
        }
    }

    let mut edge_ids = Vec::with_capacity(vs.len());
    for (u, v) in cycle.steps() {
        match graph.edge_id(u, v) {
            Some(id) => edge_ids.push(Some(id)),
            None => {
                violations.push(Violation::NonEdgeStep(u, v));
                edge_ids.push(None);
            }
        }
    }

    if matches!(mode, VerifyMode::Compatible | VerifyMode::Rainbow) {
        // Consecutive cycle edges share exactly the vertex between them.
        let k = vs.len();
        for i in 0..k {
            let (e, f) = (edge_ids[i], edge_ids[(i + 1) % k]);
            if let (Some(e), Some(f)) = (e, f) {
                if !system.compatible(e, f) {
                    violations.push(Violation::ConflictingPair {
                        vertex: vs[(i + 1) % k],
                        first: graph.endpoints(e),
                        second: graph.endpoints(f),
                    });
                }
            }
        }
    }

    if mode == VerifyMode::Rainbow {
        match system {
            ConflictSystem::Global(_) => {
                let mut by_color: Vec<(ColorId, usize)> = edge_ids
                    .iter()
                    .flatten()
                    .map(|&e| (system.color(e).unwrap(), e))
                    .collect();
                by_color.sort_unstable();
                for w in by_color.windows(2) {
                    if w[0].0 == w[1].0 {
                        violations.push(Violation::RepeatedColor {
                            color: w[0].0,
                            first: graph.endpoints(w[0].1),
                            second: graph.endpoints(w[1].1),
                        });
                    }
                }
            }
            ConflictSystem::Local(_) => violations.push(Violation::RainbowNeedsColors),
        }
    }

    Verdict { violations }
}

/// Ground truth for booster enumeration: a pair `{v, w}` is reported exactly
/// when it is a host edge and the union of `p` and `r`, restricted to the
/// vertex set of `p`, contains a path spanning that set with endpoints `v`
/// and `w`. Capped at 10 path vertices.
pub fn brute_force_boosters(
    p: &Path,
    r: &Graph,
    host: &Graph,
) -> Result<BTreeSet<(VertexId, VertexId)>> {
    const CAP: usize = 10;
    if p.len() > CAP {
        return Err(Error::SizeCap {
            op: "brute_force_boosters",
            n: p.len(),
            cap: CAP,
        });
    }
    if p.len() < 3 {
        return Err(Error::InvalidPath(
            "booster enumeration needs at least 3 path vertices".into(),
        ));
    }

    let verts: Vec<VertexId> = {
        let mut v = p.vertices().to_vec();
        v.sort_unstable();
        v
    };
    // Union adjacency restricted to V(P), over local indices.
    let k = verts.len();
    let local = |v: VertexId| verts.binary_search(&v).ok();
    let mut adj = vec![vec![false; k]; k];
    for w in p.vertices().windows(2) {
        let (a, b) = (local(w[0]).unwrap(), local(w[1]).unwrap());
        adj[a][b] = true;
        adj[b][a] = true;
    }
    for &(u, v) in r.edges() {
        if let (Some(a), Some(b)) = (local(u), local(v)) {
            adj[a][b] = true;
            adj[b][a] = true;
        }
    }

    let mut out = BTreeSet::new();
    for i in 0..k {
        for j in (i + 1)..k {
            if !host.has_edge(verts[i], verts[j]) {
                continue;
            }
            if spanning_path_exists(&adj, k, i, j) {
                out.insert((verts[i], verts[j]));
            }
        }
    }
    Ok(out)
}

fn spanning_path_exists(adj: &[Vec<bool>], k: usize, from: usize, to: usize) -> bool {
    fn dfs(adj: &[Vec<bool>], visited: &mut Vec<bool>, depth: usize, at: usize, to: usize) -> bool {
        if depth == visited.len() {
            return at == to;
        }
        for next in 0..visited.len() {
            if !visited[next] && adj[at][next] && !(next == to && depth + 1 < visited.len()) {
                visited[next] = true;
                if dfs(adj, visited, depth + 1, next, to) {
                    return true;
                }
                visited[next] = false;
            }
        }
        false
    }
    let mut visited = vec![false; k];
    visited[from] = true;
    dfs(adj, &mut visited, 1, from, to)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteForceOutcome {
    Cycle(Cycle),
    CertifiedNone,
}

/// Exhaustive Hamilton-cycle search with conflict pruning, for `n <= 12`.
///
/// Returns a cycle passing [`verify_cycle`] in the requested mode, or a
/// certificate that no such cycle exists.
pub fn brute_force_hamilton(
    graph: &Graph,
    system: &ConflictSystem,
    mode: VerifyMode,
) -> Result<BruteForceOutcome> {
    const CAP: usize = 12;
    let n = graph.n();
    if n > CAP {
        return Err(Error::SizeCap {
            op: "brute_force_hamilton",
            n,
            cap: CAP,
        });
    }
    if mode == VerifyMode::Rainbow && system.mode() == crate::conflict::Mode::Local {
        return Err(Error::InvalidSystem(
            "rainbow search needs a global (colored) system".into(),
        ));
    }
    if n < 3 {
        return Ok(BruteForceOutcome::CertifiedNone);
    }

    let constrained = mode != VerifyMode::HamiltonianOnly;
    let rainbow = mode == VerifyMode::Rainbow;
    let mut order = vec![0usize; n];
    let mut used = vec![false; n];
    used[0] = true;
    let mut used_colors: BTreeSet<ColorId> = BTreeSet::new();

    fn extend(
        graph: &Graph,
        system: &ConflictSystem,
        constrained: bool,
        rainbow: bool,
        order: &mut Vec<usize>,
        used: &mut Vec<bool>,
        used_colors: &mut BTreeSet<ColorId>,
        depth: usize,
    ) -> bool {
        let n = graph.n();
        if depth == n {
            let last = order[n - 1];
            if !graph.has_edge(last, 0) {
                return false;
            }
            if constrained {
                let closing = graph.edge_id(last, 0).unwrap();
                let before = graph.edge_id(order[n - 2], last).unwrap();
                let after = graph.edge_id(0, order[1]).unwrap();
                if !system.compatible(before, closing) || !system.compatible(closing, after) {
                    return false;
                }
                if rainbow {
                    let color = system.color(closing).unwrap();
                    if used_colors.contains(&color) {
                        return false;
                    }
                }
            }
            return true;
        }
        let at = order[depth - 1];
        for &next in graph.neighbors(at) {
            if used[next] {
                continue;
            }
            if constrained && depth >= 2 {
                let prev_edge = graph.edge_id(order[depth - 2], at).unwrap();
                let this_edge = graph.edge_id(at, next).unwrap();
                if !system.compatible(prev_edge, this_edge) {
                    continue;
                }
            }
            let this_edge = graph.edge_id(at, next).unwrap();
            let color = if rainbow { system.color(this_edge) } else { None };
            if let Some(c) = color {
                if used_colors.contains(&c) {
                    continue;
                }
                used_colors.insert(c);
            }
            used[next] = true;
            order[depth] = next;
            if extend(
                graph, system, constrained, rainbow, order, used, used_colors, depth + 1,
            ) {
                return true;
            }
            used[next] = false;
            if let Some(c) = color {
                used_colors.remove(&c);
            }
        }
        false
    }

    if extend(
        graph,
        system,
        constrained,
        rainbow,
        &mut order,
        &mut used,
        &mut used_colors,
        1,
    ) {
        let cycle = Cycle(order);
        debug_assert!(verify_cycle(graph, system, &cycle, mode).pass());
        Ok(BruteForceOutcome::Cycle(cycle))
    } else {
        Ok(BruteForceOutcome::CertifiedNone)
    }
}

/// Permutation oracle for directed Hamiltonicity: tries every cyclic order of
/// the vertices. Only sensible for `m <= 8`.
pub fn brute_force_directed_hamilton(d: &Digraph) -> Result<Option<Vec<VertexId>>> {
    const CAP: usize = 8;
    let m = d.vertex_count();
    if m > CAP {
        return Err(Error::SizeCap {
            op: "brute_force_directed_hamilton",
            n: m,
            cap: CAP,
        });
    }
    if m < 2 {
        return Ok(None);
    }
    let mut rest: Vec<VertexId> = (1..m).collect();
    let mut found = None;
    permute(&mut rest, 0, &mut |perm| {
        if found.is_some() {
            return;
        }
        let mut ok = d.has_arc(0, perm[0]) && d.has_arc(perm[m - 2], 0);
        if ok {
            for w in perm.windows(2) {
                if !d.has_arc(w[0], w[1]) {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut cycle = vec![0];
            cycle.extend_from_slice(perm);
            found = Some(cycle);
        }
    });
    Ok(found)
}

/// Enumerates every directed Hamilton cycle (as vertex sequences starting at
/// 0) of a digraph with `m <= 8` vertices.
pub fn all_directed_hamilton_cycles(d: &Digraph) -> Result<Vec<Vec<VertexId>>> {
    const CAP: usize = 8;
    let m = d.vertex_count();
    if m > CAP {
        return Err(Error::SizeCap {
            op: "all_directed_hamilton_cycles",
            n: m,
            cap: CAP,
        });
    }
    let mut out = Vec::new();
    if m < 2 {
        return Ok(out);
    }
    let mut rest: Vec<VertexId> = (1..m).collect();
    permute(&mut rest, 0, &mut |perm| {
        let mut ok = d.has_arc(0, perm[0]) && d.has_arc(perm[m - 2], 0);
        if ok {
            for w in perm.windows(2) {
                if !d.has_arc(w[0], w[1]) {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut cycle = vec![0];
            cycle.extend_from_slice(perm);
            out.push(cycle);
        }
    });
    Ok(out)
}

fn permute<F: FnMut(&[VertexId])>(items: &mut Vec<VertexId>, at: usize, visit: &mut F) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, visit);
        items.swap(at, i);
    }
}
