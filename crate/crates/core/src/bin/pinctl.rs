//! Command-line front end for the experiment harness.
//!
//! Exit status: 0 on success, 2 when every outcome was infeasible, 1 on error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pinning::harness::{
    brute_force_min_pinning, fixed_gain_study, run_batch, run_scenario, Profile, Scenario,
};
use pinning::network::MembershipProfile;

#[derive(Parser)]
#[command(name = "pinctl", version, about = "Pinning-node selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial: GA, then simulate the best pinning set.
    Simulate(Common),
    /// Run repeated trials and report statistics.
    Batch(Common),
    /// Compare fixed gains against the minimal-gain baseline.
    FixedGain {
        #[command(flatten)]
        common: Common,
        /// Comma-separated gains.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        gains: Vec<f64>,
    },
    /// Exhaustive minimum pinning set for a small single network.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Override the network size (at most 16).
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Print a built-in profile as a scenario file.
    GenScenario {
        #[arg(long, default_value = "single-50")]
        profile: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "profile")]
    scenario: Option<PathBuf>,
    /// Built-in profile: single-50, multi-50, multi-100, multi-200 or fixed-gain-50.
    #[arg(long)]
    profile: Option<String>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count override.
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convergence tolerance override.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn scenario(&self) -> pinning::Result<Scenario> {
        let mut sc = match (&self.scenario, &self.profile) {
            (Some(path), _) => Scenario::load(path)?,
            (None, Some(name)) => name.parse::<Profile>()?.scenario(),
            (None, None) => Profile::Single50.scenario(),
        };
        if let Some(seed) = self.seed {
            sc.seed = seed;
        }
        if let Some(trials) = self.trials {
            sc.trials = trials;
        }
        if let Some(tol) = self.tol {
            sc.simulation.convergence_tol = tol;
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> pinning::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| pinning::Error::Scenario(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)
        .map_err(|e| pinning::Error::Scenario(format!("{}: {e}", path.display())))
}

/// `Ok(true)` when at least one outcome was feasible.
fn run(cli: Cli) -> pinning::Result<bool> {
    match cli.command {
        Command::Simulate(c) => {
            let sc = c.scenario()?;
            let out = run_scenario(&sc, c.out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(out.feasible)
        }
        Command::Batch(c) => {
            let sc = c.scenario()?;
            let summary = run_batch(&sc, sc.trials, c.out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(summary.feasibility_rate > 0.0)
        }
        Command::FixedGain { common, gains } => {
            let sc = common.scenario()?;
            let table = fixed_gain_study(&sc, &gains, sc.trials)?;
            let mut csv = Vec::new();
            table.write_csv(&mut csv).expect("writing to memory");
            print!("{}", String::from_utf8_lossy(&csv));
            if let Some(dir) = &common.out {
                write_json(&dir.join("fixed_gain.json"), &table)?;
                fs::write(dir.join("fixed_gain.csv"), &csv)
                    .map_err(|e| pinning::Error::Scenario(e.to_string()))?;
            }
            let any = std::iter::once(&table.baseline)
                .chain(&table.fixed)
                .any(|r| r.feasibility_rate > 0.0);
            Ok(any)
        }
        Command::Oracle { common, nodes } => {
            let mut sc = common.scenario()?;
            if let Some(n) = nodes {
                sc.membership = MembershipProfile::single(n);
                sc.networks.truncate(1);
                sc.kind = pinning::harness::ScenarioKind::Single;
            }
            let inst = sc.instance(0)?;
            let net = inst.system.network(0);
            let result = brute_force_min_pinning(net, &sc.ga.stability)?;
            println!("{}", serde_json::to_string_pretty(&result)?);
            if let Some(dir) = &common.out {
                write_json(&dir.join("oracle.json"), &result)?;
            }
            Ok(result.is_some())
        }
        Command::GenScenario { profile, out } => {
            let text = profile.parse::<Profile>()?.scenario().to_toml()?;
            match out {
                Some(path) => fs::write(&path, text)
                    .map_err(|e| pinning::Error::Scenario(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
