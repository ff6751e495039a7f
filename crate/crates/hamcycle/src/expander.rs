//! Expander certification and the random d-out construction of sparse
//! compatible subgraphs.
//!
//! A graph is a `(k, r)`-expander when every vertex set `X` with `|X| <= k`
//! has at least `r |X|` neighbors outside itself. Certification is exact: a
//! depth-first scan over vertex subsets, pruned by the observation that
//! adding one vertex to `X` lowers `|N(X) \ X| - r |X|` by at most `r + 1`,
//! so branches whose slack exceeds `(r + 1) * (k - |X|)` cannot contain a
//! violating superset. The scan is budgeted by node count; exceeding the
//! budget yields no certificate either way.

use crate::conflict::{ConflictSystem, Mode};

use crate::graph::{Graph, VertexId};
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct ExpanderParams {
    /// Largest set size checked.
    pub k: usize,
    /// Required expansion factor.
    pub r: usize,
    /// Maximum number of search nodes examined during certification.
    pub enumeration_budget: usize,
}

impl ExpanderParams {
    /// The defaults used by the sparse pipeline: `k = n / 4`, `r = 2`.
    pub fn for_graph_order(n: usize) -> Self {
        Self {
            k: (n / 4).max(1),
            r: 2,
            enumeration_budget: 10_000_000,
        }
    }

    pub fn new(k: usize, r: usize) -> Self {
        assert!(k >= 1 && r >= 1, "expander parameters must be positive");
        Self {
            k,
            r,
            enumeration_budget: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExpanderCertificate {
    CertifiedTrue,
    CertifiedFalse { witness: Vec<VertexId> },
    BudgetExceeded,
}

impl ExpanderCertificate {
    pub fn is_true(&self) -> bool {
        matches!(self, ExpanderCertificate::CertifiedTrue)
    }
}

/// Exact `(k, r)`-expander certification over all sets of size at most `k`,
/// within the enumeration budget.
pub fn is_expander(graph: &Graph, params: &ExpanderParams) -> ExpanderCertificate {
    let n = graph.n();
    if n == 0 {
        return ExpanderCertificate::CertifiedTrue;
    }
    let words = n.div_ceil(64);
    let mut adj_words = vec![vec![0u64; words]; n];
    for v in 0..n {
        for &w in graph.neighbors(v) {
            adj_words[v][w / 64] |= 1 << (w % 64);
        }
    }

    struct Scan<'a> {
        graph: &'a Graph,
        adj: &'a [Vec<u64>],
        k: usize,
        r: usize,
        budget: usize,
        nodes: usize,
        members: Vec<VertexId>,
        in_set: Vec<u64>,
        nbhd: Vec<u64>,
        outside: usize,
    }

    enum Outcome {
        Violation(Vec<VertexId>),
        Clean,
        OutOfBudget,
    }

    impl Scan<'_> {
        fn run(&mut self, next: usize) -> Outcome {
            if self.members.len() == self.k {
                return Outcome::Clean;
            }
            // Extending X by a set S removes at most |S ∩ (N(X) \ X)| vertices
            // from the outside neighborhood, so the margin drops by at most
            // min(|S|, c1) + r |S| where c1 counts outside neighbors still
            // addable in this branch. Prune when even that cannot violate.
            if !self.members.is_empty() {
                let margin = self.outside as i64 - (self.r * self.members.len()) as i64;
                let room = self.k - self.members.len();
                let c1 = self.outside_candidates_from(next);
                let max_drop = (room.min(c1) + self.r * room) as i64;
                if margin > max_drop {
                    return Outcome::Clean;
                }
            }
            for v in next..self.graph.n() {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Outcome::OutOfBudget;
                }
                let delta = self.include(v);
                let margin = self.outside as i64 - (self.r * self.members.len()) as i64;
                if margin < 0 {
                    return Outcome::Violation(self.members.clone());
                }
                match self.run(v + 1) {
                    Outcome::Clean => {}
                    other => return other,
                }
                self.exclude(v, delta);
            }
            Outcome::Clean
        }

        /// Outside neighbors with id at least `next`.
        fn outside_candidates_from(&self, next: usize) -> usize {
            let mut count = 0usize;
            let start_word = next / 64;
            for w in start_word..self.nbhd.len() {
                let mut bits = self.nbhd[w] & !self.in_set[w];
                if w == start_word {
                    bits &= !0u64 << (next % 64);
                }
                count += bits.count_ones() as usize;
            }
            count
        }

        /// Adds `v` to the set; returns the neighborhood words newly set so
        /// the change can be undone.
        fn include(&mut self, v: usize) -> (Vec<(usize, u64)>, bool) {
            let was_outside = self.nbhd[v / 64] & (1 << (v % 64)) != 0;
            if was_outside {
                self.outside -= 1;
            }
            self.in_set[v / 64] |= 1 << (v % 64);
            self.members.push(v);
            let mut added = Vec::new();
            for w in 0..self.nbhd.len() {
                let new_bits = self.adj[v][w] & !self.nbhd[w];
                if new_bits != 0 {
                    self.nbhd[w] |= new_bits;
                    let outside_bits = new_bits & !self.in_set[w];
                    self.outside += outside_bits.count_ones() as usize;
                    added.push((w, new_bits));
                }
            }
            (added, was_outside)
        }

        fn exclude(&mut self, v: usize, delta: (Vec<(usize, u64)>, bool)) {
            let (added, was_outside) = delta;
            for (w, bits) in added {
                self.nbhd[w] &= !bits;
                let outside_bits = bits & !self.in_set[w];
                self.outside -= outside_bits.count_ones() as usize;
            }
            self.in_set[v / 64] &= !(1u64 << (v % 64));
            self.members.pop();
            if was_outside {
                self.outside += 1;
            }
        }
    }

    let mut scan = Scan {
        graph,
        adj: &adj_words,
        k: params.k.min(n),
        r: params.r,
        budget: params.enumeration_budget,
        nodes: 0,
        members: Vec::new(),
        in_set: vec![0u64; words],
        nbhd: vec![0u64; words],
        outside: 0,
    };
    match scan.run(0) {
        Outcome::Violation(witness) => ExpanderCertificate::CertifiedFalse { witness },
        Outcome::Clean => ExpanderCertificate::CertifiedTrue,
        Outcome::OutOfBudget => ExpanderCertificate::BudgetExceeded,
    }
}

#[derive(Debug, Clone)]
pub struct DOutParams {
    /// Edges sampled per vertex, with repetition.
    pub d: usize,
    /// Fresh-seed attempts before giving up.
    pub max_retries: usize,
    pub seed: u64,
}

impl DOutParams {
    pub fn new(d: usize, seed: u64) -> Self {
        assert!(d >= 1);
        Self {
            d,
            max_retries: 64,
            seed,
        }
    }
}

impl Default for DOutParams {
    fn default() -> Self {
        Self {
            d: 8,
            max_retries: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExpanderBuildFailure {
    pub attempts: usize,
    /// Certificate status of the last attempted subgraph.
    pub last_certificate: Option<ExpanderCertificate>,
    /// True when every attempt already failed the compatibility check.
    pub all_incompatible: bool,
}

/// Samples the random d-out subgraph: every vertex independently picks `d`
/// incident edges of `G` (with repetition) and `R` is the union of all
/// picks, so `|E(R)| <= d n`.
pub(crate) fn sample_d_out(graph: &Graph, d: usize, rng: &mut SplitMix64) -> Graph {
    let mut edges = std::collections::BTreeSet::new();
    for v in 0..graph.n() {
        let deg = graph.degree(v);
        if deg == 0 {
            continue;
        }
        for _ in 0..d {
            let w = graph.neighbors(v)[rng.below(deg)];
            edges.insert((v.min(w), v.max(w)));
        }
    }
    Graph::new(graph.n(), edges).expect("d-out edges come from a valid graph")
}

/// True when every pair of edges of `r` that the system constrains is
/// compatible: incident pairs for local systems, all pairs (i.e. distinct
/// colors) for global ones.
pub(crate) fn subgraph_compatible(graph: &Graph, r: &Graph, system: &ConflictSystem) -> bool {
    match system.mode() {
        Mode::Local => {
            for v in 0..r.n() {
                let nbrs = r.neighbors(v);
                for (i, &a) in nbrs.iter().enumerate() {
                    let ea = graph.edge_id(v, a).expect("R is a subgraph of G");
                    for &b in &nbrs[i + 1..] {
                        let eb = graph.edge_id(v, b).expect("R is a subgraph of G");
                        if !system.compatible(ea, eb) {
                            return false;
                        }
                    }
                }
            }
            true
        }
        Mode::Global => {
            let mut seen = std::collections::HashSet::new();
            r.edges().iter().all(|&(u, v)| {
                let e = graph.edge_id(u, v).expect("R is a subgraph of G");
                seen.insert(system.color(e).expect("global system colors every edge"))
            })
        }
    }
}

/// Builds a compatible `(k, r)`-expander by repeated d-out sampling.
///
/// Each attempt draws a fresh sub-seed; attempts whose edge set conflicts
/// under `system`, or which certify as non-expanders, are discarded. A
/// `BudgetExceeded` certificate is not a failure: the subgraph is returned
/// with its certificate status for the caller to judge.
pub fn build_compatible_expander(
    graph: &Graph,
    system: &ConflictSystem,
    dout: &DOutParams,
    params: &ExpanderParams,
) -> std::result::Result<(Graph, ExpanderCertificate), ExpanderBuildFailure> {
    let mut rng = SplitMix64::new(dout.seed);
    let mut last_certificate = None;
    let mut all_incompatible = true;
    let attempts = dout.max_retries.max(1);
    for _ in 0..attempts {
        let mut attempt_rng = rng.fork();
        let r = sample_d_out(graph, dout.d, &mut attempt_rng);
        if !subgraph_compatible(graph, &r, system) {
            continue;
        }
        all_incompatible = false;
        let cert = is_expander(&r, params);
        match cert {
            ExpanderCertificate::CertifiedFalse { .. } => {
                last_certificate = Some(cert);
            }
            _ => return Ok((r, cert)),
        }
    }
    Err(ExpanderBuildFailure {
        attempts,
        last_certificate,
        all_incompatible,
    })
}

/// Checks `|E(R)| <= d n` together with `R ⊆ G`.
pub fn d_out_edge_bound_holds(graph: &Graph, r: &Graph, d: usize) -> bool {
    r.m() <= d * graph.n() && r.edges().iter().all(|&(u, v)| graph.has_edge(u, v))
}
