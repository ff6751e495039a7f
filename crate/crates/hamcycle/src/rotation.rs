//! Rotation-extension machinery.
//!
//! An elementary rotation takes a path `v_1 .. v_k` and a chord `{v_k, v_i}`
//! (with `i <= k - 2`) of the working graph and produces the path
//! `v_1 .. v_i, v_k, v_{k-1}, .., v_{i+1}`: same vertex set, one endpoint
//! moved. [`rotate_reachable_ends`] closes under rotations with one endpoint
//! fixed; [`find_boosters`] closes under rotations at both endpoints and
//! reports every endpoint pair that is a host edge, together with a witness
//! path. Exploration is breadth-first with lowest-id tie-breaking, so results
//! are deterministic.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Graph, Path, VertexId};

/// Working adjacency for a path-plus-graph union, restricted to the path's
/// vertex set.
pub(crate) struct UnionGraph {
    /// Sorted neighbor lists keyed by vertex id.
    adj: BTreeMap<VertexId, Vec<VertexId>>,
}

impl UnionGraph {
    /// Union of the path edges and the edges of `extra` graphs, restricted to
    /// the vertices of `path`.
    pub(crate) fn restricted_to_path(path: &[VertexId], extra: &[&Graph]) -> Self {
        let members: BTreeSet<VertexId> = path.iter().copied().collect();
        let mut sets: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        let mut add = |u: VertexId, v: VertexId| {
            sets.entry(u).or_default().insert(v);
            sets.entry(v).or_default().insert(u);
        };
        for w in path.windows(2) {
            add(w[0], w[1]);
        }
        for g in extra {
            for &(u, v) in g.edges() {
                if members.contains(&u) && members.contains(&v) {
                    add(u, v);
                }
            }
        }
        let adj = sets
            .into_iter()
            .map(|(v, set)| (v, set.into_iter().collect()))
            .collect();
        Self { adj }
    }

    pub(crate) fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.adj.get(&v).map(|l| l.as_slice()).unwrap_or(&[])
    }
}

/// Enumerates the rotated successors of `path` at its last position, using
/// chords from `u`. Successors are produced in increasing chord-position
/// order.
fn rotations_at_tail(u: &UnionGraph, path: &[VertexId]) -> Vec<Vec<VertexId>> {
    let k = path.len();
    let tail = path[k - 1];
    let mut pos: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (i, &v) in path.iter().enumerate() {
        pos.insert(v, i);
    }
    let mut out = Vec::new();
    let mut chords: Vec<usize> = u
        .neighbors(tail)
        .iter()
        .filter_map(|w| pos.get(w).copied())
        .filter(|&i| i + 2 <= k - 1)
        .collect();
    chords.sort_unstable();
    for i in chords {
        let mut next = Vec::with_capacity(k);
        next.extend_from_slice(&path[..=i]);
        next.extend(path[i + 1..].iter().rev());
        out.push(next);
    }
    out
}

/// Fixpoint of endpoints reachable from `p` by rotations that keep `fixed`
/// in place, using edges of `r`. The opposite endpoint of `p` itself is
/// always a member.
pub fn rotate_reachable_ends(p: &Path, r: &Graph, fixed: VertexId) -> Result<BTreeSet<VertexId>> {
    let vs = p.vertices();
    let oriented: Vec<VertexId> = if vs[0] == fixed {
        vs.to_vec()
    } else if *vs.last().unwrap() == fixed {
        vs.iter().rev().copied().collect()
    } else {
        return Err(Error::InvalidPath(format!(
            "vertex {fixed} is not an endpoint of the path"
        )));
    };

    let u = UnionGraph::restricted_to_path(&oriented, &[r]);
    let mut ends = BTreeSet::new();
    let mut seen: HashSet<Vec<VertexId>> = HashSet::new();
    let mut queue = VecDeque::new();
    ends.insert(*oriented.last().unwrap());
    seen.insert(oriented.clone());
    queue.push_back(oriented);
    while let Some(path) = queue.pop_front() {
        for next in rotations_at_tail(&u, &path) {
            if seen.insert(next.clone()) {
                ends.insert(*next.last().unwrap());
                queue.push_back(next);
            }
        }
    }
    Ok(ends)
}

/// One discovered booster: a host edge joining the endpoints of some
/// spanning path of `P ∪ R` on the vertex set of `P`.
#[derive(Debug, Clone)]
pub struct Booster {
    /// Endpoint pair as (min, max).
    pub pair: (VertexId, VertexId),
    /// A spanning path realizing the pair.
    pub witness: Vec<VertexId>,
}

/// Result of a booster scan.
#[derive(Debug, Clone)]
pub struct BoosterScan {
    /// Pair -> witness, keyed deterministically.
    pub boosters: BTreeMap<(VertexId, VertexId), Vec<VertexId>>,
    /// Number of path states expanded.
    pub states_visited: usize,
    /// True when the exploration budget stopped the closure early; the
    /// reported set is then still sound but possibly incomplete.
    pub truncated: bool,
}

pub(crate) const DEFAULT_ROTATION_BUDGET: usize = 200_000;

/// Rotation closure from both endpoints of `p` over `P ∪ R`, reporting every
/// discovered endpoint pair that is a host edge.
///
/// The closure explores path states breadth-first, rotating at either end,
/// and deduplicates states up to reversal. On small instances (at most a few
/// thousand path states) the closure is exhaustive and the result equals the
/// brute-force booster set; `budget` caps the exploration on larger ones.
pub fn find_boosters_scan(
    p: &Path,
    r: &Graph,
    host: &Graph,
    budget: usize,
) -> Result<BoosterScan> {
    if p.len() < 3 {
        return Err(Error::InvalidPath(
            "booster enumeration needs at least 3 path vertices".into(),
        ));
    }
    for w in p.vertices().windows(2) {
        if !host.has_edge(w[0], w[1]) && !r.has_edge(w[0], w[1]) {
            return Err(Error::InvalidPath(format!(
                "path step ({}, {}) lies in neither host nor R",
                w[0], w[1]
            )));
        }
    }

    let u = UnionGraph::restricted_to_path(p.vertices(), &[r]);
    let mut scan = BoosterScan {
        boosters: BTreeMap::new(),
        states_visited: 0,
        truncated: false,
    };
    let mut seen: HashSet<Vec<VertexId>> = HashSet::new();
    let mut queue = VecDeque::new();

    let start = canonical(p.vertices().to_vec());
    record_pair(&mut scan, host, &start);
    seen.insert(start.clone());
    queue.push_back(start);

    while let Some(path) = queue.pop_front() {
        if scan.states_visited >= budget {
            scan.truncated = true;
            break;
        }
        scan.states_visited += 1;
        let reversed: Vec<VertexId> = path.iter().rev().copied().collect();
        for base in [&path, &reversed] {
            for next in rotations_at_tail(&u, base) {
                let next = canonical(next);
                if seen.insert(next.clone()) {
                    record_pair(&mut scan, host, &next);
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(scan)
}

/// Paths with up to this many vertices get the exact subset dynamic program;
/// larger instances fall back to the budgeted rotation closure.
pub const EXACT_BOOSTER_CAP: usize = 20;

/// The booster set: host edges `{v, w}` such that `P ∪ R` contains a path on
/// the vertex set of `P` with endpoints `v` and `w`.
///
/// Rotation closure alone can miss endpoint pairs (some spanning paths are
/// not reachable from `P` by any rotation sequence), so for paths of at most
/// [`EXACT_BOOSTER_CAP`] vertices the set is computed exactly by a dynamic
/// program over vertex subsets. Beyond the cap the budgeted closure is used
/// and the result is sound but possibly incomplete.
pub fn find_boosters(p: &Path, r: &Graph, host: &Graph) -> Result<BTreeSet<(VertexId, VertexId)>> {
    Ok(find_boosters_detailed(p, r, host)?
        .boosters
        .keys()
        .copied()
        .collect())
}

/// [`find_boosters`] with witness paths: each reported pair comes with a
/// spanning path of `P ∪ R` realizing it.
pub fn find_boosters_detailed(p: &Path, r: &Graph, host: &Graph) -> Result<BoosterScan> {
    if p.len() <= EXACT_BOOSTER_CAP {
        exact_booster_scan(p, r, host)
    } else {
        find_boosters_scan(p, r, host, DEFAULT_ROTATION_BUDGET)
    }
}

/// Exact booster enumeration by dynamic programming over subsets of the
/// path's vertex set: for every start vertex `s`, `reach[mask]` holds the
/// endpoints of simple paths with vertex set `mask` starting at `s`.
fn exact_booster_scan(p: &Path, r: &Graph, host: &Graph) -> Result<BoosterScan> {
    if p.len() < 3 {
        return Err(Error::InvalidPath(
            "booster enumeration needs at least 3 path vertices".into(),
        ));
    }
    for w in p.vertices().windows(2) {
        if !host.has_edge(w[0], w[1]) && !r.has_edge(w[0], w[1]) {
            return Err(Error::InvalidPath(format!(
                "path step ({}, {}) lies in neither host nor R",
                w[0], w[1]
            )));
        }
    }

    let mut verts: Vec<VertexId> = p.vertices().to_vec();
    verts.sort_unstable();
    let k = verts.len();
    let local = |v: VertexId| verts.binary_search(&v).expect("path vertex");

    // Local adjacency masks over the union graph restricted to V(P).
    let mut adj = vec![0u32; k];
    let u = UnionGraph::restricted_to_path(p.vertices(), &[r]);
    for (i, &v) in verts.iter().enumerate() {
        for &w in u.neighbors(v) {
            adj[i] |= 1u32 << local(w);
        }
    }

    let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    let mut scan = BoosterScan {
        boosters: BTreeMap::new(),
        states_visited: 0,
        truncated: false,
    };
    let mut reach = vec![0u32; 1usize << k];
    for s in 0..k {
        // Skip starts that cannot yield a new host-edge pair.
        let any_host = (0..k).any(|t| {
            t != s
                && host.has_edge(verts[s], verts[t])
                && !scan.boosters.contains_key(&pair_of(verts[s], verts[t]))
        });
        if !any_host {
            continue;
        }
        for x in reach.iter_mut() {
            *x = 0;
        }
        reach[1usize << s] = 1u32 << s;
        for mask in (1usize << s)..=(full as usize) {
            let mut ends = reach[mask];
            if ends == 0 || mask & (1usize << s) == 0 {
                continue;
            }
            scan.states_visited += 1;
            while ends != 0 {
                let t = ends.trailing_zeros() as usize;
                ends &= ends - 1;
                let mut nb = adj[t] & !(mask as u32);
                while nb != 0 {
                    let w = nb.trailing_zeros() as usize;
                    nb &= nb - 1;
                    reach[mask | (1usize << w)] |= 1u32 << w;
                }
            }
        }
        let mut ends = reach[full as usize];
        while ends != 0 {
            let t = ends.trailing_zeros() as usize;
            ends &= ends - 1;
            if t == s {
                continue;
            }
            let pair = pair_of(verts[s], verts[t]);
            if host.has_edge(pair.0, pair.1) && !scan.boosters.contains_key(&pair) {
                let witness = reconstruct_path(&reach, &adj, &verts, full, s, t);
                scan.boosters.insert(pair, witness);
            }
        }
    }
    Ok(scan)
}

fn pair_of(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    (a.min(b), a.max(b))
}

/// Walks the DP table backwards from `(full, t)` to the start vertex.
fn reconstruct_path(
    reach: &[u32],
    adj: &[u32],
    verts: &[VertexId],
    full: u32,
    s: usize,
    t: usize,
) -> Vec<VertexId> {
    let mut path_local = vec![t];
    let mut mask = full as usize;
    let mut at = t;
    while mask != (1usize << s) {
        let prev_mask = mask & !(1usize << at);
        let candidates = reach[prev_mask] & adj[at];
        debug_assert!(candidates != 0, "DP table must contain a predecessor");
        let prev = candidates.trailing_zeros() as usize;
        path_local.push(prev);
        mask = prev_mask;
        at = prev;
    }
    path_local.reverse();
    path_local.into_iter().map(|i| verts[i]).collect()
}

fn canonical(mut path: Vec<VertexId>) -> Vec<VertexId> {
    if path.first() > path.last() {
        path.reverse();
    }
    path
}

fn record_pair(scan: &mut BoosterScan, host: &Graph, path: &[VertexId]) {
    let (a, b) = (path[0], *path.last().unwrap());
    let pair = (a.min(b), a.max(b));
    if host.has_edge(pair.0, pair.1) {
        scan.boosters.entry(pair).or_insert_with(|| {
            debug_assert!(witness_is_sound(path));
            path.to_vec()
        });
    }
}

fn witness_is_sound(path: &[VertexId]) -> bool {
    let mut sorted = path.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Lazy variant used by the sparse solver: explores the closure in the same
/// deterministic order and yields the first pair accepted by `accept`,
/// without materializing the full booster set.
pub(crate) fn first_accepted_booster<F>(
    p: &[VertexId],
    u: &UnionGraph,
    host: &Graph,
    budget: usize,
    mut accept: F,
) -> (Option<Booster>, usize, usize)
where
    F: FnMut((VertexId, VertexId)) -> bool,
{
    let mut seen: HashSet<Vec<VertexId>> = HashSet::new();
    let mut queue = VecDeque::new();
    let mut enumerated = 0usize;
    let mut rejected = 0usize;
    let mut reported: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();

    let start = canonical(p.to_vec());
    let mut check = |path: &[VertexId],
                     reported: &mut BTreeSet<(VertexId, VertexId)>,
                     enumerated: &mut usize,
                     rejected: &mut usize|
     -> Option<Booster> {
        let (a, b) = (path[0], *path.last().unwrap());
        let pair = (a.min(b), a.max(b));
        if !host.has_edge(pair.0, pair.1) || !reported.insert(pair) {
            return None;
        }
        *enumerated += 1;
        if accept(pair) {
            Some(Booster {
                pair,
                witness: path.to_vec(),
            })
        } else {
            *rejected += 1;
            None
        }
    };

    if let Some(b) = check(&start, &mut reported, &mut enumerated, &mut rejected) {
        return (Some(b), enumerated, rejected);
    }
    seen.insert(start.clone());
    queue.push_back(start);

    let mut states = 0usize;
    while let Some(path) = queue.pop_front() {
        if states >= budget {
            break;
        }
        states += 1;
        let reversed: Vec<VertexId> = path.iter().rev().copied().collect();
        for base in [&path, &reversed] {
            for next in rotations_at_tail(u, base) {
                let next = canonical(next);
                if seen.insert(next.clone()) {
                    if let Some(b) = check(&next, &mut reported, &mut enumerated, &mut rejected) {
                        return (Some(b), enumerated, rejected);
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    (None, enumerated, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::verify::brute_force_boosters;
    use proptest::prelude::*;

    #[test]
    fn no_rotations_means_opposite_endpoint_only() {
        let host = Graph::complete(5);
        let p = Path::in_graph(&host, vec![0, 1, 2, 3, 4]).unwrap();
        let r = Graph::new(5, vec![]).unwrap();
        let ends = rotate_reachable_ends(&p, &r, 0).unwrap();
        assert_eq!(ends, BTreeSet::from([4]));
    }

    #[test]
    fn single_rotation_example() {
        // P = (0, 1, 2, 3, 4), R = {{4, 1}}, fixed = 0: the chord rotates P
        // into (0, 1, 4, 3, 2), so the reachable ends are {4, 2}.
        let host = Graph::complete(5);
        let p = Path::in_graph(&host, vec![0, 1, 2, 3, 4]).unwrap();
        let r = Graph::new(5, vec![(1, 4)]).unwrap();
        let ends = rotate_reachable_ends(&p, &r, 0).unwrap();
        assert_eq!(ends, BTreeSet::from([2, 4]));
    }

    #[test]
    fn fixed_must_be_an_endpoint() {
        let host = Graph::complete(4);
        let p = Path::in_graph(&host, vec![0, 1, 2]).unwrap();
        let r = Graph::new(4, vec![]).unwrap();
        assert!(rotate_reachable_ends(&p, &r, 1).is_err());
    }

    #[test]
    fn triangle_boosters() {
        let host = Graph::complete(3);
        let p = Path::in_graph(&host, vec![0, 1, 2]).unwrap();
        let r = Graph::new(3, vec![(0, 2)]).unwrap();
        let boosters = find_boosters(&p, &r, &host).unwrap();
        let expected: BTreeSet<_> = [(0, 1), (0, 2), (1, 2)].into_iter().collect();
        assert_eq!(boosters, expected);
    }

    #[test]
    fn degenerate_path_rejected() {
        let host = Graph::complete(3);
        let p = Path::in_graph(&host, vec![0, 1]).unwrap();
        let r = Graph::new(3, vec![]).unwrap();
        assert!(find_boosters(&p, &r, &host).is_err());
    }

    #[test]
    fn cycle_path_reaches_all_cycle_edges() {
        // P ∪ R = C5; the spanning paths are exactly the five edge deletions,
        // so the booster set is all five cycle edges.
        let host = Graph::complete(5);
        let p = Path::in_graph(&host, vec![0, 1, 2, 3, 4]).unwrap();
        let r = Graph::new(5, vec![(0, 4)]).unwrap();
        let boosters = find_boosters(&p, &r, &host).unwrap();
        let expected: BTreeSet<_> = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]
            .into_iter()
            .collect();
        assert_eq!(boosters, expected);
    }

    /// Exhaustive rotation tree without memoization, for cross-checking the
    /// breadth-first closure.
    fn rotation_tree_ends(
        u: &UnionGraph,
        path: &[VertexId],
        seen: &mut HashSet<Vec<VertexId>>,
        ends: &mut BTreeSet<VertexId>,
    ) {
        ends.insert(*path.last().unwrap());
        for next in rotations_at_tail(u, path) {
            if seen.insert(next.clone()) {
                rotation_tree_ends(u, &next, seen, ends);
            }
        }
    }

    proptest! {
        #[test]
        fn closure_matches_rotation_tree(seed in 0u64..600) {
            let mut rng = SplitMix64::new(seed);
            let n = 4 + rng.below(5);
            let host = Graph::complete(n);
            let len = 3 + rng.below(n - 2);
            let mut verts: Vec<VertexId> = (0..n).collect();
            rng.shuffle(&mut verts);
            verts.truncate(len);
            let p = Path::in_graph(&host, verts.clone()).unwrap();
            let r = Graph::gen_gnp(n, 0.4, seed ^ 0x99).unwrap();

            let fixed = verts[0];
            let expected = {
                let u = UnionGraph::restricted_to_path(&verts, &[&r]);
                let mut seen = HashSet::new();
                let mut ends = BTreeSet::new();
                seen.insert(verts.clone());
                rotation_tree_ends(&u, &verts, &mut seen, &mut ends);
                ends
            };
            prop_assert_eq!(rotate_reachable_ends(&p, &r, fixed).unwrap(), expected);
        }

        #[test]
        fn closure_scan_is_sound_subset(seed in 0u64..400) {
            let mut rng = SplitMix64::new(seed);
            let n = 4 + rng.below(4);
            let host = Graph::complete(n);
            let mut verts: Vec<VertexId> = (0..n).collect();
            rng.shuffle(&mut verts);
            let r = {
                let mut edges: BTreeSet<(usize, usize)> = verts
                    .windows(2)
                    .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
                    .collect();
                edges.extend(Graph::gen_gnp(n, 0.4, seed ^ 0x31).unwrap().edges().iter().copied());
                Graph::new(n, edges).unwrap()
            };
            let p = Path::in_graph(&r, verts).unwrap();
            let scan = find_boosters_scan(&p, &r, &host, 100_000).unwrap();
            let exact = find_boosters(&p, &r, &host).unwrap();
            for pair in scan.boosters.keys() {
                prop_assert!(exact.contains(pair));
            }
        }

        #[test]
        fn find_boosters_matches_brute_force(seed in 0u64..1500) {
            let mut rng = SplitMix64::new(seed);
            let n = 3 + rng.below(5); // up to 7 vertices
            let len = 3 + rng.below(n - 2);
            let mut verts: Vec<VertexId> = (0..n).collect();
            rng.shuffle(&mut verts);
            verts.truncate(len);

            // R covers the path edges plus random extras; host independent.
            let mut r_edges: BTreeSet<(usize, usize)> = verts
                .windows(2)
                .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
                .collect();
            let extra = Graph::gen_gnp(n, 0.5, seed ^ 0x1234).unwrap();
            r_edges.extend(extra.edges().iter().copied());
            let r = Graph::new(n, r_edges).unwrap();
            let host = Graph::gen_gnp(n, 0.7, seed ^ 0x777).unwrap();

            let p = Path::in_graph(&r, verts).unwrap();
            let ours = find_boosters(&p, &r, &host).unwrap();
            let brute = brute_force_boosters(&p, &r, &host).unwrap();
            prop_assert_eq!(ours, brute);
        }
    }
}
