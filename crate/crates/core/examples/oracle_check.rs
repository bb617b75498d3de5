//! Compare the GA against exhaustive search on small networks.
//!
//! `cargo run --release --example oracle_check -- 7 20`

use pinning::ga::{evolve, GaConfig};
use pinning::harness::brute_force_min_pinning;
use pinning::network::{generate_adjacency, DirectedNetwork};
use pinning::stability::StabilityParams;
use pinning::MultiNetworkSystem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6);
    let runs: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);
    let params = StabilityParams::default();

    let mut hits = 0;
    for seed in 0..runs {
        let net = DirectedNetwork::new(generate_adjacency(n, 0.5, seed)?, 0.8, 1.0, vec![0.0])?;
        let best = brute_force_min_pinning(&net, &params)?;
        let sys = MultiNetworkSystem::single(net)?;
        let cfg = GaConfig { population_size: 32, generations: 30, rng_seed: seed, ..Default::default() };
        let report = evolve(&cfg, &sys)?;
        let ga = report.feasible().then(|| report.pinned_count());
        let exact = best.as_ref().map(|b| b.count);
        hits += usize::from(ga == exact);
        println!("seed {seed:>3}: exhaustive {exact:?} ({:?}), GA {ga:?}", best.map(|b| b.subset));
    }
    println!("{hits}/{runs} matched");
    Ok(())
}
