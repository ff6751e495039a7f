//! Statistical battery for sampled G(n,p) instances: degree concentration,
//! density of small and mid-size vertex sets, and cross-pair edge counts.
//!
//! The asymptotic statements behind these checks hide `o(1)` slack, so every
//! check takes explicit finite-size tolerances. Exhaustive enumeration over
//! set pairs is hopeless; the battery samples random sets from a dedicated
//! seed plus structured families (vertex neighborhoods, bisections), which
//! preserves falsification power while staying fast.

use crate::graph::{Graph, VertexId};
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct PropertyTolerances {
    /// Relative degree window around `(n - 1) p`.
    pub degree_slack: f64,
    /// Number of sampled (X, Y) pairs for the cross-count check.
    pub pair_samples: usize,
    /// Multiplier applied to the density bounds of the set checks.
    pub density_margin: f64,
    /// Pairs with `|X||Y| p` below `pair_mass_factor * n` are skipped.
    pub pair_mass_factor: f64,
    /// Seed of the sampling generator; fixed so that loosening tolerances
    /// re-examines the same sets.
    pub sample_seed: u64,
}

impl Default for PropertyTolerances {
    fn default() -> Self {
        Self {
            degree_slack: 0.25,
            pair_samples: 200,
            density_margin: 1.0,
            pair_mass_factor: 2.0,
            sample_seed: 0x5EED_CAFE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DegreeCheck {
    pub pass: bool,
    pub expected: f64,
    pub min_degree: usize,
    pub max_degree: usize,
}

#[derive(Debug, Clone)]
pub struct SetDensityCheck {
    pub pass: bool,
    /// Largest observed `e(X) / bound` over all checked sets.
    pub worst_ratio: f64,
    pub worst_size: usize,
    pub checked: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct PairCountCheck {
    pub pass: bool,
    /// Smallest observed `e(X, Y) / (|X||Y| p / 2)`.
    pub worst_ratio: f64,
    pub checked: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct GnpPropertyReport {
    pub degrees: DegreeCheck,
    pub small_sets: SetDensityCheck,
    pub mid_sets: SetDensityCheck,
    pub pair_counts: PairCountCheck,
}

impl GnpPropertyReport {
    pub fn all_pass(&self) -> bool {
        self.degrees.pass && self.small_sets.pass && self.mid_sets.pass && self.pair_counts.pass
    }
}

/// Runs the four-property battery against nominal edge probability `p`.
pub fn check_gnp_properties(graph: &Graph, p: f64, tol: &PropertyTolerances) -> GnpPropertyReport {
    let n = graph.n();
    assert!(n > 0, "the battery needs a nonempty graph");
    let mut rng = SplitMix64::new(tol.sample_seed);

    // (i) every degree within (1 +/- slack) of the mean degree (n - 1) p.
    let degrees = {
        let expected = (n.saturating_sub(1)) as f64 * p;
        let min_degree = graph.min_degree();
        let max_degree = graph.max_degree();
        let lo = (1.0 - tol.degree_slack) * expected;
        let hi = (1.0 + tol.degree_slack) * expected;
        DegreeCheck {
            pass: min_degree as f64 >= lo && max_degree as f64 <= hi,
            expected,
            min_degree,
            max_degree,
        }
    };

    // Size threshold separating the small-set and mid-set regimes.
    let np4 = n as f64 * p.powi(4);
    let small_cap = if np4 > 0.0 {
        (np4.powf(-1.0 / 3.0).floor() as usize).min(n)
    } else {
        n
    };

    // (ii) small sets: e(X) <= 8 |X| * margin.
    let small_sets = {
        let mut worst_ratio = 0.0f64;
        let mut worst_size = 0;
        let mut checked = 0;
        let mut skipped = 0;
        if small_cap == 0 {
            skipped += 1;
        } else {
            for t in geometric_sizes(1, small_cap) {
                let bound = 8.0 * t as f64 * tol.density_margin;
                for set in sampled_sets(graph, t, 40, &mut rng) {
                    checked += 1;
                    let ratio = edges_within(graph, &set) as f64 / bound;
                    if ratio > worst_ratio {
                        worst_ratio = ratio;
                        worst_size = t;
                    }
                }
            }
        }
        SetDensityCheck {
            pass: worst_ratio <= 1.0,
            worst_ratio,
            worst_size,
            checked,
            skipped,
        }
    };

    // (iii) mid-size sets: e(X) <= t^2 p (n / t)^{1/2} * margin.
    let mid_sets = {
        let mut worst_ratio = 0.0f64;
        let mut worst_size = 0;
        let mut checked = 0;
        let mut skipped = 0;
        let t_min = (small_cap + 1).min(n);
        if t_min > n || p == 0.0 {
            skipped += 1;
        } else {
            for t in geometric_sizes(t_min, n) {
                let bound = (t * t) as f64 * p * (n as f64 / t as f64).sqrt() * tol.density_margin;
                if bound == 0.0 {
                    skipped += 1;
                    continue;
                }
                for set in sampled_sets(graph, t, 40, &mut rng) {
                    checked += 1;
                    let ratio = edges_within(graph, &set) as f64 / bound;
                    if ratio > worst_ratio {
                        worst_ratio = ratio;
                        worst_size = t;
                    }
                }
            }
        }
        SetDensityCheck {
            pass: worst_ratio <= 1.0,
            worst_ratio,
            worst_size,
            checked,
            skipped,
        }
    };

    // (iv) disjoint pairs with enough mass: e(X, Y) >= |X||Y| p / 2.
    let pair_counts = {
        let mut worst_ratio = f64::INFINITY;
        let mut checked = 0;
        let mut skipped = 0;
        let mut order: Vec<VertexId> = (0..n).collect();
        // Structured family (random bisections) followed by random disjoint
        // pairs with sizes between n/4 and n/2.
        let mut splits: Vec<(usize, usize)> = vec![(n / 2, n - n / 2); 4];
        let quarter = (n / 4).max(1);
        for _ in 0..tol.pair_samples {
            let x_len = quarter + rng.below(quarter);
            let y_len = quarter + rng.below(quarter);
            splits.push((x_len, y_len));
        }
        for (x_len, y_len) in splits {
            if x_len + y_len > n {
                skipped += 1;
                continue;
            }
            rng.shuffle(&mut order);
            let xs = &order[..x_len];
            let ys = &order[x_len..x_len + y_len];
            let mass = (x_len * y_len) as f64 * p;
            if mass < tol.pair_mass_factor * n as f64 {
                skipped += 1;
                continue;
            }
            checked += 1;
            let ratio = graph.edge_count_between(xs, ys) as f64 / (mass / 2.0);
            if ratio < worst_ratio {
                worst_ratio = ratio;
            }
        }
        let pass = checked == 0 || worst_ratio >= 1.0;
        PairCountCheck {
            pass,
            worst_ratio: if checked == 0 { f64::NAN } else { worst_ratio },
            checked,
            skipped,
        }
    };

    GnpPropertyReport {
        degrees,
        small_sets,
        mid_sets,
        pair_counts,
    }
}

fn geometric_sizes(lo: usize, hi: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut t = lo.max(1);
    while t < hi {
        sizes.push(t);
        t = (t * 2).max(t + 1);
    }
    sizes.push(hi);
    sizes.dedup();
    sizes
}

fn sampled_sets(graph: &Graph, t: usize, count: usize, rng: &mut SplitMix64) -> Vec<Vec<VertexId>> {
    let n = graph.n();
    if t > n {
        return Vec::new();
    }
    let mut order: Vec<VertexId> = (0..n).collect();
    let mut sets = Vec::with_capacity(count + n.min(count));
    for _ in 0..count {
        rng.shuffle(&mut order);
        let mut set = order[..t].to_vec();
        set.sort_unstable();
        sets.push(set);
    }
    // Structured family: vertices packed with their first neighbors.
    for v in 0..n.min(count) {
        let mut set = vec![v];
        set.extend(graph.neighbors(v).iter().copied().take(t - 1));
        set.sort_unstable();
        set.dedup();
        if set.len() == t {
            sets.push(set);
        }
    }
    sets
}

fn edges_within(graph: &Graph, set: &[VertexId]) -> usize {
    let mut marked = vec![false; graph.n()];
    for &v in set {
        marked[v] = true;
    }
    let mut twice = 0;
    for &v in set {
        twice += graph.neighbors(v).iter().filter(|&&w| marked[w]).count();
    }
    twice / 2
}
