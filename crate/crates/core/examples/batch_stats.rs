//! Run a batch from a profile or scenario file and print the summary.
//!
//! `cargo run --release --example batch_stats -- single-50 10 out/batch`

use std::path::PathBuf;

use pinning::harness::{run_batch, Profile, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let which = args.next().unwrap_or_else(|| "single-50".into());
    let sc = match which.parse::<Profile>() {
        Ok(p) => p.scenario(),
        Err(_) => Scenario::load(which.as_ref())?,
    };
    let trials: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(sc.trials);
    let out = args.next().map(PathBuf::from);
    let summary = run_batch(&sc, trials, out.as_deref())?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
