//! Pins needed when every pinned node gets the same fixed gain, against the
//! per-set minimal gain.
//!
//! `cargo run --release --example fixed_gain_study -- 10`

use pinning::harness::{fixed_gain_study, Profile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(10);
    let sc = Profile::FixedGain50.scenario();
    let table = fixed_gain_study(&sc, &[1.0, 2.0, 3.0, 4.0, 5.0], trials)?;
    table.write_csv(std::io::stdout().lock())?;
    Ok(())
}
