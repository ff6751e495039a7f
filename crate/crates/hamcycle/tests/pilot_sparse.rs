use hamcycle::conflict::ConflictSystem;
use hamcycle::expander::DOutParams;
use hamcycle::graph::Graph;
use hamcycle::posa::{solve_constrained, SearchLimits};
use hamcycle::rng::mix_seed;
use std::time::Instant;

#[test]
#[ignore]
fn pilot_sparse_300() {
    let n = 300usize;
    let p = 3.0 * (n as f64).ln() / n as f64;
    let np = n as f64 * p;
    let delta = (0.02 * np).floor() as usize;
    println!("n={n} p={p:.5} np={np:.2} delta={delta}");
    let t0 = Instant::now();
    let mut ok = 0;
    for trial in 0..100u64 {
        let seed = mix_seed(0xC0FFEE, 0, trial);
        let g = Graph::gen_gnp(n, p, seed).unwrap();
        let s = ConflictSystem::random_bounded(&g, delta, seed ^ 0x51);
        let dout = DOutParams::new(8, seed ^ 0x52);
        let report = solve_constrained(&g, &s, &dout, &SearchLimits::default());
        if report.success() { ok += 1; }
        else { println!("trial {trial} failed: {:?}", report.failure_stage()); }
    }
    println!("successes: {ok}/100 in {:?}", t0.elapsed());
}
