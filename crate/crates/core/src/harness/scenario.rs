use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::SimulationConfig;
use crate::error::{Error, Result};
use crate::ga::GaConfig;
use crate::network::{
    build_multinetwork, generate_adjacency_with, generate_membership_with, network_nodes,
    DirectedNetwork, MembershipProfile, MultiNetworkSystem,
};
use crate::stability::{GainMode, StabilityParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Single,
    Multi,
}

/// Per-network generation parameters. States are scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// An edge exists where a U[0,1) draw exceeds this.
    pub threshold: f64,
    pub coupling_strength: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    pub target: f64,
    pub initial_mean: f64,
    /// Standard deviation of the initial states (not a variance).
    pub initial_std: f64,
}

fn one() -> f64 {
    1.0
}

/// Everything needed to reproduce a batch of trials.
///
/// Each trial draws its memberships, adjacency matrices, initial states and
/// GA seed from a stream derived from `(seed, trial index)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub trials: usize,
    /// Write every k-th sample to the trajectory CSVs.
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    pub membership: MembershipProfile,
    pub networks: Vec<NetworkSpec>,
    pub ga: GaConfig,
    pub simulation: SimulationConfig,
}

fn default_stride() -> usize {
    10
}

/// Built-in scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Single50,
    Multi50,
    Multi100,
    Multi200,
    /// Single 50-node network tuned for comparing fixed gains.
    FixedGain50,
}

impl Profile {
    pub const ALL: [Profile; 5] = [
        Profile::Single50,
        Profile::Multi50,
        Profile::Multi100,
        Profile::Multi200,
        Profile::FixedGain50,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Single50 => "single-50",
            Profile::Multi50 => "multi-50",
            Profile::Multi100 => "multi-100",
            Profile::Multi200 => "multi-200",
            Profile::FixedGain50 => "fixed-gain-50",
        }
    }

    pub fn scenario(self) -> Scenario {
        match self {
            Profile::Single50 => single_profile(self.name(), SINGLE_DELTA),
            Profile::FixedGain50 => single_profile(self.name(), FIXED_GAIN_DELTA),
            Profile::Multi50 => multi_profile(self.name(), MembershipProfile::small_50(), 100),
            Profile::Multi100 => multi_profile(self.name(), MembershipProfile::medium_100(), 200),
            Profile::Multi200 => multi_profile(self.name(), MembershipProfile::large_200(), 400),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown profile `{s}`")))
    }
}

// Decay rate of the slowest error mode is roughly δ/2 at the minimal gain,
// so δ sets how fast the pinned system settles.
const SINGLE_DELTA: f64 = 10.0;
const FIXED_GAIN_DELTA: f64 = 0.5;
const MULTI_DELTA: f64 = 1.0;

fn single_profile(name: &str, delta: f64) -> Scenario {
    Scenario {
        name: name.to_string(),
        kind: ScenarioKind::Single,
        seed: 1,
        trials: 30,
        output_stride: default_stride(),
        membership: MembershipProfile::single(50),
        networks: vec![NetworkSpec {
            threshold: 0.5,
            coupling_strength: 0.8,
            gamma: 1.0,
            target: 90.0,
            initial_mean: 100.0,
            initial_std: 15.0,
        }],
        ga: GaConfig {
            stability: StabilityParams {
                delta,
                ..Default::default()
            },
            ..Default::default()
        },
        simulation: SimulationConfig::single_default(),
    }
}

fn multi_profile(name: &str, membership: MembershipProfile, population: usize) -> Scenario {
    let spec = |target, initial_mean, initial_std| NetworkSpec {
        threshold: 0.8,
        coupling_strength: 0.8,
        gamma: 1.0,
        target,
        initial_mean,
        initial_std,
    };
    Scenario {
        name: name.to_string(),
        kind: ScenarioKind::Multi,
        seed: 1,
        trials: 30,
        output_stride: default_stride(),
        membership,
        networks: vec![spec(50.0, 45.0, 10.0), spec(70.0, 80.0, 12.0), spec(120.0, 130.0, 8.0)],
        ga: GaConfig {
            population_size: population,
            stability: StabilityParams {
                delta: MULTI_DELTA,
                ..Default::default()
            },
            ..Default::default()
        },
        simulation: SimulationConfig::multi_default(),
    }
}

/// One concrete draw of a scenario.
#[derive(Debug, Clone)]
pub struct Instance {
    pub trial: usize,
    pub seed: u64,
    pub system: MultiNetworkSystem,
    pub x0: Vec<f64>,
    pub ga_seed: u64,
}

/// Seed of trial `trial` under master seed `master`.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial as u64);
    rng.next_u64()
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Scenario("trials must be >= 1".into()));
        }
        if self.output_stride == 0 {
            return Err(Error::Scenario("output_stride must be >= 1".into()));
        }
        let k = self.membership.num_networks();
        if self.networks.len() != k {
            return Err(Error::Scenario(format!(
                "membership profile has {k} networks but {} network specs were given",
                self.networks.len()
            )));
        }
        if self.kind == ScenarioKind::Single && k != 1 {
            return Err(Error::Scenario("single scenarios need exactly one network".into()));
        }
        for (i, s) in self.networks.iter().enumerate() {
            if !(s.initial_std > 0.0 && s.initial_std.is_finite()) {
                return Err(Error::Scenario(format!("network {i}: initial_std must be > 0")));
            }
            if !(0.0..=1.0).contains(&s.threshold) {
                return Err(Error::Scenario(format!("network {i}: threshold must be in [0, 1]")));
            }
            if !(s.coupling_strength > 0.0 && s.gamma > 0.0) {
                return Err(Error::Scenario(format!(
                    "network {i}: coupling_strength and gamma must be > 0"
                )));
            }
            if !(s.target.is_finite() && s.initial_mean.is_finite()) {
                return Err(Error::Scenario(format!("network {i}: non-finite target or mean")));
            }
        }
        self.ga.validate()?;
        self.simulation.validate()?;
        // membership realisability
        generate_membership_with(&self.membership, &mut ChaCha8Rng::seed_from_u64(0))?;
        Ok(())
    }

    pub fn with_gain_mode(&self, mode: GainMode) -> Self {
        let mut sc = self.clone();
        sc.ga.gain_mode = mode;
        sc
    }

    /// Draws the networks, initial state and GA seed for one trial.
    pub fn instance(&self, trial: usize) -> Result<Instance> {
        let seed = trial_seed(self.seed, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let memberships = generate_membership_with(&self.membership, &mut rng)?;

        let mut networks = Vec::with_capacity(self.networks.len());
        for (k, spec) in self.networks.iter().enumerate() {
            let ids = network_nodes(&memberships, k);
            let g = generate_adjacency_with(ids.len(), spec.threshold, &mut rng)?;
            networks.push(DirectedNetwork::with_node_ids(
                g,
                spec.coupling_strength,
                spec.gamma,
                vec![spec.target],
                ids,
            )?);
        }

        let dists = self
            .networks
            .iter()
            .map(|s| Normal::new(s.initial_mean, s.initial_std).map_err(|e| Error::Scenario(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let x0 = memberships
            .iter()
            .map(|ks| ks.iter().map(|&k| dists[k].sample(&mut rng)).sum::<f64>() / ks.len() as f64)
            .collect();

        let ga_seed = rng.random();
        let system = build_multinetwork(networks, memberships)?;
        Ok(Instance {
            trial,
            seed,
            system,
            x0,
            ga_seed,
        })
    }
}
