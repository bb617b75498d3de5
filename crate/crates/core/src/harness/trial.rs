use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::scenario::{Instance, Scenario};
use crate::dynamics::{convergence_time, simulate_multi, Trajectory};
use crate::error::{Error, Result};
use crate::ga::{evolve, GaConfig, GaReport};
use crate::network::MultiNetworkSystem;

/// Pinning rate among nodes belonging to exactly `multiplicity` networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPinning {
    pub multiplicity: usize,
    pub nodes: usize,
    pub pinned: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub feasible: bool,
    pub nodes: usize,
    pub pinned_count: usize,
    pub pinned_fraction: f64,
    pub gains: Vec<Option<f64>>,
    /// `None` when not simulated or not settled within the horizon.
    pub convergence_time: Option<f64>,
    pub terminal_max_error: Option<f64>,
    pub class_pinning: Vec<ClassPinning>,
    pub lmi_evaluations: usize,
    pub wall_clock_secs: f64,
}

impl TrialOutcome {
    /// `log10` of the terminal error; exact zeros map to the smallest
    /// positive normal double.
    pub fn log10_terminal_error(&self) -> Option<f64> {
        self.terminal_max_error.map(|e| e.max(f64::MIN_POSITIVE).log10())
    }
}

/// Outcome plus the in-memory artifacts behind it.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub outcome: TrialOutcome,
    pub report: GaReport,
    pub trajectory: Option<Trajectory>,
}

pub(crate) fn class_pinning(sys: &MultiNetworkSystem, aggregated: &[bool]) -> Vec<ClassPinning> {
    let k = sys.num_networks();
    let mut classes: Vec<ClassPinning> = (1..=k)
        .map(|multiplicity| ClassPinning {
            multiplicity,
            nodes: 0,
            pinned: 0,
        })
        .collect();
    for (i, &p) in aggregated.iter().enumerate() {
        let c = &mut classes[sys.membership(i).len() - 1];
        c.nodes += 1;
        c.pinned += usize::from(p);
    }
    classes
}

/// GA then simulation on an already drawn instance.
pub fn run_instance(sc: &Scenario, inst: &Instance) -> Result<TrialRun> {
    let start = Instant::now();
    let cfg = GaConfig {
        rng_seed: inst.ga_seed,
        ..sc.ga.clone()
    };
    let sys = &inst.system;
    let report = evolve(&cfg, sys)?;
    let aggregated = report.best.aggregated(sys);

    let trajectory = match report.plan(sys) {
        Some(plan) => Some(simulate_multi(sys, &plan, &inst.x0, &sc.simulation)?),
        None => None,
    };
    let nodes = sys.total_nodes();
    let pinned_count = report.pinned_count();
    let outcome = TrialOutcome {
        trial: inst.trial,
        seed: inst.seed,
        feasible: report.feasible(),
        nodes,
        pinned_count,
        pinned_fraction: pinned_count as f64 / nodes as f64,
        gains: report.best_evaluation.gains(),
        convergence_time: trajectory
            .as_ref()
            .and_then(|t| convergence_time(t, sc.simulation.convergence_tol)),
        terminal_max_error: trajectory.as_ref().map(Trajectory::terminal_max_error),
        class_pinning: class_pinning(sys, &aggregated),
        lmi_evaluations: report.lmi_evaluations,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    Ok(TrialRun {
        outcome,
        report,
        trajectory,
    })
}

/// Draws trial `trial` of the scenario and runs it.
pub fn run_trial(sc: &Scenario, trial: usize) -> Result<TrialRun> {
    sc.validate()?;
    run_instance(sc, &sc.instance(trial)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `ga_report.csv`, `summary.json` and, when simulated,
/// `trajectory.csv` and `errors.csv` into `dir`.
pub fn write_artifacts(run: &TrialRun, stride: usize, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("ga_report.csv");
    run.report
        .write_history_csv(create(&path)?)
        .map_err(|e| Error::io(&path, e))?;
    if let Some(traj) = &run.trajectory {
        let path = dir.join("trajectory.csv");
        traj.write_states_csv(create(&path)?, stride)
            .map_err(|e| Error::io(&path, e))?;
        let path = dir.join("errors.csv");
        traj.write_errors_csv(create(&path)?, stride)
            .map_err(|e| Error::io(&path, e))?;
    }
    let summary = serde_json::json!({
        "outcome": run.outcome,
        "log10_terminal_error": run.outcome.log10_terminal_error(),
        "ga": run.report.summary_json(),
    });
    let path = dir.join("summary.json");
    serde_json::to_writer_pretty(create(&path)?, &summary)?;
    Ok(())
}

/// Runs the scenario's first trial, writing artifacts to `out` if given.
///
/// A GA that ends infeasible is not an error: the outcome says so and no
/// simulation is run.
pub fn run_scenario(sc: &Scenario, out: Option<&Path>) -> Result<TrialOutcome> {
    let run = run_trial(sc, 0)?;
    if let Some(dir) = out {
        write_artifacts(&run, sc.output_stride, dir)?;
    }
    Ok(run.outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SimulationConfig;
    use crate::harness::scenario::Profile;
    use crate::network::MembershipProfile;

    fn tiny(n: usize) -> Scenario {
        let mut sc = Profile::Single50.scenario();
        sc.membership = MembershipProfile::single(n);
        sc.ga.population_size = 8;
        sc.ga.generations = 5;
        sc.ga.stability.delta = 1.0;
        sc.simulation = SimulationConfig {
            horizon: 20.0,
            ..SimulationConfig::single_default()
        };
        sc
    }

    #[test]
    fn scalar_network_pins_its_only_node() {
        let sc = tiny(1);
        let out = run_scenario(&sc, None).unwrap();
        assert!(out.feasible);
        assert_eq!(out.pinned_count, 1);
        assert_eq!(out.pinned_fraction, 1.0);
        let c = out.gains[0].unwrap();
        assert!((c - 0.5).abs() < 1e-5, "{c}");
        // e(t) = e0·exp(-cγt)
        let run = run_trial(&sc, 0).unwrap();
        let traj = run.trajectory.unwrap();
        let e0 = traj.errors()[0][0];
        let i = traj.len() / 2;
        let expect = e0 * (-c * traj.times()[i]).exp();
        assert!((traj.errors()[i][0] - expect).abs() < 1e-9 * e0.max(1.0));
    }

    #[test]
    fn infeasible_outcome_is_not_an_error() {
        let mut sc = tiny(4);
        sc.ga.stability.delta = 1e4;
        let out = run_scenario(&sc, None).unwrap();
        assert!(!out.feasible);
        assert!(out.convergence_time.is_none());
        assert!(out.terminal_max_error.is_none());
    }

    #[test]
    fn artifacts_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let sc = tiny(3);
        run_scenario(&sc, Some(dir.path())).unwrap();
        for f in ["trajectory.csv", "errors.csv", "ga_report.csv", "summary.json"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }
}
