use hamcycle::graph::{Graph, Path};
use hamcycle::rotation::find_boosters;
use std::time::Instant;

#[test]
#[ignore]
fn dp_timing_k20() {
    // Spanning path on 20 vertices over a moderately dense R, host complete.
    let host = Graph::complete(20);
    for seed in 0..5u64 {
        let r = {
            let extra = Graph::gen_gnp(20, 0.5, seed).unwrap();
            let mut edges: std::collections::BTreeSet<(usize, usize)> =
                extra.edges().iter().copied().collect();
            for i in 0..19 {
                edges.insert((i, i + 1));
            }
            Graph::new(20, edges).unwrap()
        };
        let p = Path::in_graph(&r, (0..20).collect()).unwrap();
        let t0 = Instant::now();
        let b = find_boosters(&p, &r, &host).unwrap();
        println!("seed {seed}: {} boosters in {:?}", b.len(), t0.elapsed());
    }
}
