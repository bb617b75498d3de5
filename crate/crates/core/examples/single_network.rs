//! Evolve a pin set for one 50-node network, simulate it and write the CSVs.
//!
//! `cargo run --release --example single_network -- out/single`

use std::path::PathBuf;

use pinning::dynamics::{lyapunov_series, node_convergence_times};
use pinning::harness::{run_trial, write_artifacts, Profile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let sc = Profile::Single50.scenario();
    let run = run_trial(&sc, 0)?;
    let o = &run.outcome;
    println!(
        "pinned {}/{} gain {:?} settled at {:?}s",
        o.pinned_count, o.nodes, o.gains[0], o.convergence_time
    );

    if let Some(traj) = &run.trajectory {
        let times = node_convergence_times(traj, sc.simulation.convergence_tol);
        let pins = &run.report.best.genes()[0];
        let mean = |want: bool| {
            let v: Vec<f64> = times.iter().zip(pins).filter(|(_, &p)| p == want).filter_map(|(t, _)| *t).collect();
            v.iter().sum::<f64>() / v.len().max(1) as f64
        };
        println!("mean settle time: pinned {:.3}s, unpinned {:.3}s", mean(true), mean(false));
        let v = lyapunov_series(traj, 1.0);
        println!("V(0) = {:.3e}, V(T) = {:.3e}", v.values[0], v.values.last().unwrap());
    }
    if let Some(dir) = out {
        write_artifacts(&run, sc.output_stride, &dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
