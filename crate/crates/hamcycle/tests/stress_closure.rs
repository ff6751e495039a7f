// Scratch stress run: closure vs brute oracle on many random small instances.
use std::collections::BTreeSet;
use hamcycle::graph::{Graph, Path};
use hamcycle::rng::SplitMix64;
use hamcycle::rotation::find_boosters;
use hamcycle::verify::brute_force_boosters;

#[test]
#[ignore]
fn closure_stress() {
    let mut mismatches = 0;
    for seed in 0u64..60000 {
        let mut rng = SplitMix64::new(seed);
        let n = 3 + rng.below(5);
        let len = 3 + rng.below(n - 2);
        let mut verts: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut verts);
        verts.truncate(len);
        let mut r_edges: BTreeSet<(usize, usize)> = verts
            .windows(2)
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
            .collect();
        let p_r = 0.2 + 0.1 * rng.below(7) as f64;
        let extra = Graph::gen_gnp(n, p_r, seed ^ 0x1234).unwrap();
        r_edges.extend(extra.edges().iter().copied());
        let r = Graph::new(n, r_edges).unwrap();
        let p_h = 0.2 + 0.1 * rng.below(9) as f64;
        let host = Graph::gen_gnp(n, p_h, seed ^ 0x777).unwrap();
        let p = Path::in_graph(&r, verts).unwrap();
        let ours = find_boosters(&p, &r, &host).unwrap();
        let brute = brute_force_boosters(&p, &r, &host).unwrap();
        // witnesses must realize their pairs
        let detail = hamcycle::rotation::find_boosters_detailed(&p, &r, &host).unwrap();
        for (pair, w) in &detail.boosters {
            let mut sorted = w.clone();
            sorted.sort_unstable();
            let mut expect: Vec<usize> = p.vertices().to_vec();
            expect.sort_unstable();
            assert_eq!(sorted, expect, "witness must span V(P)");
            let ends = (w[0].min(*w.last().unwrap()), w[0].max(*w.last().unwrap()));
            assert_eq!(ends, *pair);
            for st in w.windows(2) {
                assert!(r.has_edge(st[0], st[1]) || p.vertices().windows(2).any(|pw| (pw[0]==st[0]&&pw[1]==st[1])||(pw[0]==st[1]&&pw[1]==st[0])), "witness edge in P∪R");
            }
        }
        if ours != brute {
            mismatches += 1;
            if mismatches < 5 {
                eprintln!("MISMATCH seed={seed} ours={ours:?} brute={brute:?}");
                eprintln!("  P={:?} R={:?} host={:?}", p.vertices(), r.edges(), host.edges());
            }
        }
    }
    assert_eq!(mismatches, 0, "{mismatches} mismatches");
}
