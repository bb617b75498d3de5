//! Pinned fraction and settling behaviour as the LMI margin δ varies.
//!
//! `cargo run --release --example delta_sweep -- multi-50 5`

use pinning::harness::{run_batch, Profile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let profile: Profile = args.next().as_deref().unwrap_or("multi-50").parse()?;
    let trials: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let deltas: Vec<f64> = args.map(|s| s.parse()).collect::<Result<_, _>>()?;
    let deltas = if deltas.is_empty() { vec![0.5, 1.0, 2.0, 4.0, 6.0, 10.0] } else { deltas };

    println!("delta  feasible  pinned_fraction(mean±std)  log10_err(mean)");
    for delta in deltas {
        let mut sc = profile.scenario();
        sc.ga.stability.delta = delta;
        let s = run_batch(&sc, trials, None)?;
        let pf = s.pinned_fraction.as_ref().map(|p| (p.mean, p.std)).unwrap_or_default();
        let err = s.log10_terminal_error.as_ref().map(|e| e.mean);
        println!("{delta:>5}  {:>8.2}  {:.3} ± {:.3}              {err:?}", s.feasibility_rate, pf.0, pf.1);
    }
    Ok(())
}
