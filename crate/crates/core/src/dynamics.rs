//! Fixed-step integration of the pinned consensus dynamics.
//!
//! Node `i` evolves as
//!
//! ```text
//! ẋᵢ = Σ_{k∈𝒦ᵢ} [ C⁽ᵏ⁾γ⁽ᵏ⁾ Σⱼ Gᵢⱼ⁽ᵏ⁾ (xⱼ − xᵢ) − c⁽ᵏ⁾γ⁽ᵏ⁾ dᵢ⁽ᵏ⁾ (xᵢ − x*⁽ᵏ⁾) ]
//! ```
//!
//! with a single network being the `K = 1` case. Every step is stored.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{DirectedNetwork, MultiNetworkSystem};
use crate::plan::PinningPlan;

const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dt: f64,
    pub horizon: f64,
    pub integrator: Integrator,
    pub convergence_tol: f64,
}

impl SimulationConfig {
    pub fn single_default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 5.0,
            integrator: Integrator::Rk4,
            convergence_tol: 1e-3,
        }
    }

    pub fn multi_default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 2.0,
            integrator: Integrator::Rk4,
            convergence_tol: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", "must be > 0"));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::param("horizon", "must be >= dt"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::param("convergence_tol", "must be > 0"));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self::single_default()
    }
}

/// Sampled solution of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    nodes: usize,
    state_dim: usize,
    times: Vec<f64>,
    /// Per sample, node-major `N·m` states.
    states: Vec<Vec<f64>>,
    /// Per sample, `‖xᵢ − xᵢ*‖` for every node.
    errors: Vec<Vec<f64>>,
    /// Per sample, `‖e‖²` (the Lyapunov value with `q = 1`).
    lyapunov: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory from precomputed samples, e.g. for analysis of
    /// externally produced data.
    pub fn from_samples(
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
        targets: &[Vec<f64>],
    ) -> Result<Self> {
        let nodes = targets.len();
        if nodes == 0 {
            return Err(Error::EmptyNetwork);
        }
        let state_dim = targets[0].len();
        if times.len() != states.len() || times.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "times vs states",
                expected: times.len(),
                got: states.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        let mut traj = Self {
            nodes,
            state_dim,
            times: Vec::with_capacity(states.len()),
            states: Vec::with_capacity(states.len()),
            errors: Vec::with_capacity(states.len()),
            lyapunov: Vec::with_capacity(states.len()),
        };
        for (t, x) in times.into_iter().zip(states) {
            if x.len() != nodes * state_dim {
                return Err(Error::DimensionMismatch {
                    what: "state sample length",
                    expected: nodes * state_dim,
                    got: x.len(),
                });
            }
            traj.push(t, x, targets);
        }
        Ok(traj)
    }

    fn push(&mut self, t: f64, x: Vec<f64>, targets: &[Vec<f64>]) {
        let m = self.state_dim;
        let errs: Vec<f64> = targets
            .iter()
            .enumerate()
            .map(|(i, tgt)| {
                x[i * m..(i + 1) * m]
                    .iter()
                    .zip(tgt)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        self.lyapunov.push(errs.iter().map(|e| e * e).sum());
        self.errors.push(errs);
        self.states.push(x);
        self.times.push(t);
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn errors(&self) -> &[Vec<f64>] {
        &self.errors
    }

    pub fn lyapunov(&self) -> &[f64] {
        &self.lyapunov
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest node error at each sample.
    pub fn max_errors(&self) -> Vec<f64> {
        self.errors
            .iter()
            .map(|e| e.iter().copied().fold(0.0, f64::max))
            .collect()
    }

    pub fn terminal_max_error(&self) -> f64 {
        self.errors
            .last()
            .map(|e| e.iter().copied().fold(0.0, f64::max))
            .unwrap_or(0.0)
    }

    /// Writes `t,node_0,...` rows of states, keeping every `stride`-th sample
    /// (the last sample is always kept).
    pub fn write_states_csv<W: Write>(&self, out: W, stride: usize) -> std::io::Result<()> {
        let header = if self.state_dim == 1 {
            (0..self.nodes).map(|i| format!("node_{i}")).collect::<Vec<_>>()
        } else {
            (0..self.nodes)
                .flat_map(|i| (0..self.state_dim).map(move |d| format!("node_{i}_{d}")))
                .collect()
        };
        write_series(out, &header, &self.times, &self.states, stride)
    }

    /// Same layout as [`Self::write_states_csv`] with per-node error norms.
    pub fn write_errors_csv<W: Write>(&self, out: W, stride: usize) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.nodes).map(|i| format!("node_{i}")).collect();
        write_series(out, &header, &self.times, &self.errors, stride)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_series<W: Write>(
    mut out: W,
    header: &[String],
    times: &[f64],
    rows: &[Vec<f64>],
    stride: usize,
) -> std::io::Result<()> {
    let stride = stride.max(1);
    writeln!(out, "t,{}", header.join(","))?;
    let last = times.len().saturating_sub(1);
    for (idx, (t, row)) in times.iter().zip(rows).enumerate() {
        if idx % stride != 0 && idx != last {
            continue;
        }
        let mut line = fmt17(*t);
        for v in row {
            line.push(',');
            line.push_str(&fmt17(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

struct Pin {
    rate: f64,
    target: Vec<f64>,
}

#[derive(Default)]
struct NodeTerms {
    neighbours: Vec<(usize, f64)>,
    pins: Vec<Pin>,
}

/// Right-hand side of the linear consensus ODE, in neighbour-difference form.
struct ConsensusField {
    nodes: Vec<NodeTerms>,
    m: usize,
}

impl ConsensusField {
    fn empty(n: usize, m: usize) -> Self {
        Self {
            nodes: (0..n).map(|_| NodeTerms::default()).collect(),
            m,
        }
    }

    /// Adds one network's coupling and pinning terms, its local row `a`
    /// mapped to global node `ids[a]`.
    fn add_network(&mut self, net: &DirectedNetwork, ids: &[usize], pins: &[bool], gain: f64) {
        let g = net.adjacency();
        let cg = net.coupling_strength() * net.gamma();
        for (a, &i) in ids.iter().enumerate() {
            for (b, &j) in ids.iter().enumerate() {
                let w = g[(a, b)];
                if w != 0.0 {
                    self.nodes[i].neighbours.push((j, cg * w));
                }
            }
            if pins[a] {
                self.nodes[i].pins.push(Pin {
                    rate: gain * net.gamma(),
                    target: net.target().to_vec(),
                });
            }
        }
    }

    fn eval(&self, x: &[f64], dx: &mut [f64]) {
        let m = self.m;
        for (i, node) in self.nodes.iter().enumerate() {
            let xi = &x[i * m..(i + 1) * m];
            for d in 0..m {
                let mut acc = 0.0;
                for &(j, w) in &node.neighbours {
                    acc += w * (x[j * m + d] - xi[d]);
                }
                for pin in &node.pins {
                    acc -= pin.rate * (xi[d] - pin.target[d]);
                }
                dx[i * m + d] = acc;
            }
        }
    }
}

struct Stepper {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Stepper {
    fn new(len: usize) -> Self {
        Self {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            tmp: vec![0.0; len],
        }
    }

    fn step(&mut self, f: &ConsensusField, x: &mut [f64], dt: f64, integrator: Integrator) {
        match integrator {
            Integrator::Euler => {
                f.eval(x, &mut self.k1);
                for (xi, k) in x.iter_mut().zip(&self.k1) {
                    *xi += dt * k;
                }
            }
            Integrator::Rk4 => {
                let half = 0.5 * dt;
                f.eval(x, &mut self.k1);
                for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
                    *t = xi + half * k;
                }
                f.eval(&self.tmp, &mut self.k2);
                for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
                    *t = xi + half * k;
                }
                f.eval(&self.tmp, &mut self.k3);
                for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
                    *t = xi + dt * k;
                }
                f.eval(&self.tmp, &mut self.k4);
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi += dt / 6.0
                        * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
                }
            }
        }
    }
}

fn integrate(
    field: &ConsensusField,
    targets: &[Vec<f64>],
    x0: &[f64],
    sim: &SimulationConfig,
) -> Result<Trajectory> {
    sim.validate()?;
    let n = targets.len();
    let m = field.m;
    if x0.len() != n * m {
        return Err(Error::DimensionMismatch {
            what: "initial state length (N·m)",
            expected: n * m,
            got: x0.len(),
        });
    }
    let steps = sim.steps();
    let mut traj = Trajectory {
        nodes: n,
        state_dim: m,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        errors: Vec::with_capacity(steps + 1),
        lyapunov: Vec::with_capacity(steps + 1),
    };
    let mut x = x0.to_vec();
    traj.push(0.0, x.clone(), targets);
    let mut stepper = Stepper::new(x.len());
    for step in 1..=steps {
        stepper.step(field, &mut x, sim.dt, sim.integrator);
        let t = step as f64 * sim.dt;
        if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Divergence { step, time: t });
        }
        traj.push(t, x.clone(), targets);
    }
    Ok(traj)
}

/// Integrates one network with pinning vector `pinned` and gain `gain`.
///
/// `x0` is node-major with `n·m` entries, in the network's local row order.
pub fn simulate_single(
    net: &DirectedNetwork,
    pinned: &[bool],
    gain: f64,
    x0: &[f64],
    sim: &SimulationConfig,
) -> Result<Trajectory> {
    if pinned.len() != net.n() {
        return Err(Error::DimensionMismatch {
            what: "pinning vector vs network size",
            expected: net.n(),
            got: pinned.len(),
        });
    }
    if !(gain >= 0.0 && gain.is_finite()) {
        return Err(Error::param("gain", format!("{gain} must be >= 0")));
    }
    let n = net.n();
    let ids: Vec<usize> = (0..n).collect();
    let mut field = ConsensusField::empty(n, net.state_dim());
    field.add_network(net, &ids, pinned, gain);
    let targets = vec![net.target().to_vec(); n];
    integrate(&field, &targets, x0, sim)
}

/// Integrates the coupled multi-network system. Errors are measured against
/// each node's composite target.
pub fn simulate_multi(
    sys: &MultiNetworkSystem,
    plan: &PinningPlan,
    x0: &[f64],
    sim: &SimulationConfig,
) -> Result<Trajectory> {
    let plan = PinningPlan::new(sys, plan.pins.clone(), plan.gains.clone())?;
    let mut field = ConsensusField::empty(sys.total_nodes(), sys.state_dim());
    for (k, net) in sys.networks().iter().enumerate() {
        field.add_network(net, net.node_ids(), &plan.pins[k], plan.gains[k]);
    }
    integrate(&field, sys.composite_targets(), x0, sim)
}

fn settle_index<I>(exceeds: I, len: usize) -> Option<usize>
where
    I: DoubleEndedIterator<Item = bool> + ExactSizeIterator,
{
    // last sample still above tolerance, scanning from the end
    match exceeds.rev().position(|above| above) {
        None => Some(0),
        Some(0) => None,
        Some(back) => Some(len - back),
    }
}

/// Earliest sampled time after which the max-node error stays `≤ tol` up to
/// the horizon.
pub fn convergence_time(traj: &Trajectory, tol: f64) -> Option<f64> {
    let maxes = traj.max_errors();
    settle_index(maxes.iter().map(|&e| e > tol), maxes.len()).map(|i| traj.times[i])
}

/// Per-node version of [`convergence_time`].
pub fn node_convergence_times(traj: &Trajectory, tol: f64) -> Vec<Option<f64>> {
    (0..traj.nodes)
        .map(|i| {
            settle_index(traj.errors.iter().map(|e| e[i] > tol), traj.len())
                .map(|idx| traj.times[idx])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSeries {
    pub times: Vec<f64>,
    /// `V(t) = q·Σᵢ‖eᵢ(t)‖²`.
    pub values: Vec<f64>,
    /// Forward difference `(V[k+1] − V[k]) / Δt`, one shorter than `values`.
    pub derivative: Vec<f64>,
}

pub fn lyapunov_series(traj: &Trajectory, q: f64) -> LyapunovSeries {
    let values: Vec<f64> = traj.lyapunov.iter().map(|v| q * v).collect();
    let derivative = values
        .windows(2)
        .zip(traj.times.windows(2))
        .map(|(v, t)| (v[1] - v[0]) / (t[1] - t[0]))
        .collect();
    LyapunovSeries {
        times: traj.times.clone(),
        values,
        derivative,
    }
}
