//! Minimal pinning gain for a few pin sets on one random network.
//!
//! `cargo run --release --example stability_gain -- 8 1.0`

use pinning::network::{generate_adjacency, laplacian};
use pinning::stability::{all_pinned_gain_bound, solve_min_gain, StabilityParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    let delta: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0);

    let g = generate_adjacency(n, 0.5, 7)?;
    let ls = laplacian(&g)?.symmetric_part;
    let params = StabilityParams { delta, ..Default::default() };
    println!("n={n} delta={delta} all-pinned bound {:.4}", all_pinned_gain_bound(&ls, 0.8, 1.0, delta)?);

    // pin the first k nodes, k = 1..n
    for k in 1..=n {
        let pins: Vec<bool> = (0..n).map(|i| i < k).collect();
        let r = solve_min_gain(&ls, &pins, 0.8, 1.0, &params)?;
        match r.gain {
            Some(c) => println!("k={k:>2}  gain {c:>9.4}  margin {:.2e}", r.margin),
            None => println!("k={k:>2}  infeasible  xi {:.3}", r.xi),
        }
    }
    Ok(())
}
