//! Scenarios, trial runners, batch statistics and the exhaustive oracle.

mod batch;
mod oracle;
mod scenario;
mod trial;

pub use batch::{
    fixed_gain_study, read_trials_csv, run_batch, summarize, write_trials_csv, BatchSummary,
    ClassRate, FixedGainTable, GainRow, Stats, TrialRow, TrialStatus,
};
pub use oracle::{brute_force_min_pinning, brute_force_min_pinning_with, OracleResult, ORACLE_MAX_NODES};
pub use scenario::{trial_seed, Instance, NetworkSpec, Profile, Scenario, ScenarioKind};
pub use trial::{run_instance, run_scenario, run_trial, write_artifacts, ClassPinning, TrialOutcome, TrialRun};
