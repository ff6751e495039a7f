use hamcycle::expander::*;
use hamcycle::graph::Graph;
use hamcycle::rng::SplitMix64;
use std::time::Instant;

#[test]
#[ignore]
fn probe_k50_dout() {
    let g = Graph::complete(50);
    for seed in 0..3u64 {
        let mut rng = SplitMix64::new(seed);
        // recreate d-out sampling (not public): every vertex picks 5 incident edges
        let mut edges = std::collections::BTreeSet::new();
        for v in 0..50usize {
            for _ in 0..5 {
                let w = g.neighbors(v)[rng.below(49)];
                edges.insert((v.min(w), v.max(w)));
            }
        }
        let r = Graph::new(50, edges).unwrap();
        let mut params = ExpanderParams::for_graph_order(50);
        params.enumeration_budget = 2_000_000_000;
        let t0 = Instant::now();
        let cert = is_expander(&r, &params);
        println!("seed {seed}: m={} cert={:?} elapsed={:?}", r.m(), match cert { ExpanderCertificate::CertifiedTrue => "true", ExpanderCertificate::CertifiedFalse{..} => "false", _ => "budget" }, t0.elapsed());
    }
}
