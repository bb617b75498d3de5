//! Directed weighted networks, their Laplacians, and overlapping
//! multi-network systems.
//!
//! A [`DirectedNetwork`] owns a nonnegative adjacency matrix `G` with zero
//! diagonal, where `G[i][j] > 0` means node `i` listens to node `j`. Its
//! Laplacian is `L = diag(G·1) − G`, and stability analysis only ever needs
//! the symmetric part `L_s = (L + Lᵀ)/2`.
//!
//! A [`MultiNetworkSystem`] stitches several networks over one global node
//! set. Each node records the set of networks it belongs to, and nodes in two
//! or more networks get a composite target: the mean of their networks'
//! targets.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use nalgebra::{Complex, DMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Laplacian of a directed graph together with its symmetric part.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPair {
    pub laplacian: DMatrix<f64>,
    pub symmetric_part: DMatrix<f64>,
}

impl LaplacianPair {
    /// `L − L_s`, which is skew-symmetric.
    pub fn skew_part(&self) -> DMatrix<f64> {
        &self.laplacian - &self.symmetric_part
    }
}

/// `(A + Aᵀ)/2`.
pub fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn check_adjacency(g: &DMatrix<f64>) -> Result<()> {
    if !g.is_square() {
        return Err(Error::NotSquare {
            rows: g.nrows(),
            cols: g.ncols(),
        });
    }
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let v = g[(i, j)];
            let bad = !v.is_finite() || v < 0.0 || (i == j && v != 0.0);
            if bad {
                return Err(Error::InvalidAdjacency {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// Builds `L` with `L_ii = Σ_j G_ij`, `L_ij = −G_ij`, and its symmetric part.
pub fn laplacian(g: &DMatrix<f64>) -> Result<LaplacianPair> {
    check_adjacency(g)?;
    let n = g.nrows();
    let mut l = -g.clone();
    for i in 0..n {
        l[(i, i)] = g.row(i).sum();
    }
    let symmetric_part = symmetric_part(&l);
    Ok(LaplacianPair {
        laplacian: l,
        symmetric_part,
    })
}

/// Eigenvalues of the (generally non-symmetric) Laplacian, sorted by real part.
pub fn laplacian_spectrum(l: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut ev: Vec<Complex<f64>> = l.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// True when every eigenvalue of `L` away from zero has positive real part.
///
/// This is only surfaced as a diagnostic; networks that fail it are still
/// accepted and left to the LMI test.
pub fn is_laplacian_stable(l: &DMatrix<f64>, zero_tol: f64) -> bool {
    laplacian_spectrum(l)
        .iter()
        .all(|z| z.norm() <= zero_tol || z.re > 0.0)
}

/// Random sparse asymmetric adjacency: every off-diagonal entry is drawn from
/// `U[0, 1)` and kept only if it is strictly above `threshold`.
pub fn generate_adjacency(n: usize, threshold: f64, rng_seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    generate_adjacency_with(n, threshold, &mut rng)
}

pub fn generate_adjacency_with<R: Rng + ?Sized>(
    n: usize,
    threshold: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::param("threshold", format!("{threshold} not in [0, 1]")));
    }
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let u: f64 = rng.random();
            if u > threshold {
                g[(i, j)] = u;
            }
        }
    }
    Ok(g)
}

/// One directed network: topology, coupling constants and consensus target.
#[derive(Debug, Clone)]
pub struct DirectedNetwork {
    adjacency: DMatrix<f64>,
    laplacian: LaplacianPair,
    coupling_strength: f64,
    gamma: f64,
    target: Vec<f64>,
    node_ids: Vec<usize>,
}

impl DirectedNetwork {
    /// Network over local nodes `0..n`, which are also its global ids.
    pub fn new(
        adjacency: DMatrix<f64>,
        coupling_strength: f64,
        gamma: f64,
        target: Vec<f64>,
    ) -> Result<Self> {
        let n = adjacency.nrows();
        Self::with_node_ids(adjacency, coupling_strength, gamma, target, (0..n).collect())
    }

    /// Network whose local row `a` is global node `node_ids[a]`.
    pub fn with_node_ids(
        adjacency: DMatrix<f64>,
        coupling_strength: f64,
        gamma: f64,
        target: Vec<f64>,
        node_ids: Vec<usize>,
    ) -> Result<Self> {
        if adjacency.nrows() == 0 {
            return Err(Error::EmptyNetwork);
        }
        let laplacian = laplacian(&adjacency)?;
        if !(coupling_strength > 0.0 && coupling_strength.is_finite()) {
            return Err(Error::param("coupling_strength", "must be > 0"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", "must be > 0"));
        }
        if target.is_empty() || target.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("target", "must be a nonempty finite vector"));
        }
        if node_ids.len() != adjacency.nrows() {
            return Err(Error::DimensionMismatch {
                what: "node_ids vs adjacency",
                expected: adjacency.nrows(),
                got: node_ids.len(),
            });
        }
        let distinct: BTreeSet<_> = node_ids.iter().collect();
        if distinct.len() != node_ids.len() {
            return Err(Error::param("node_ids", "duplicate node id"));
        }
        Ok(Self {
            adjacency,
            laplacian,
            coupling_strength,
            gamma,
            target,
            node_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Dimension `m` of each node's state.
    pub fn state_dim(&self) -> usize {
        self.target.len()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn laplacian(&self) -> &LaplacianPair {
        &self.laplacian
    }

    pub fn coupling_strength(&self) -> f64 {
        self.coupling_strength
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }
}

/// K directed networks over a shared node set `0..N`.
#[derive(Debug, Clone)]
pub struct MultiNetworkSystem {
    networks: Vec<DirectedNetwork>,
    memberships: Vec<Vec<usize>>,
    overlap_set: Vec<usize>,
    composite_targets: Vec<Vec<f64>>,
    // (network, local index) of each global node, per membership
    local_index: Vec<Vec<(usize, usize)>>,
}

/// Assembles a [`MultiNetworkSystem`].
///
/// `memberships[i]` lists the networks node `i` belongs to. Every network's
/// `node_ids` must list exactly the nodes whose membership names it.
pub fn build_multinetwork(
    networks: Vec<DirectedNetwork>,
    memberships: Vec<Vec<usize>>,
) -> Result<MultiNetworkSystem> {
    if networks.is_empty() {
        return Err(Error::Empty("network list"));
    }
    let total = memberships.len();
    let m = networks[0].state_dim();
    for net in &networks {
        if net.state_dim() != m {
            return Err(Error::DimensionMismatch {
                what: "target dimension across networks",
                expected: m,
                got: net.state_dim(),
            });
        }
    }

    let mut sets: Vec<BTreeSet<usize>> = Vec::with_capacity(total);
    for (node, ks) in memberships.iter().enumerate() {
        if ks.is_empty() {
            return Err(Error::OrphanNode { node });
        }
        let set: BTreeSet<usize> = ks.iter().copied().collect();
        if let Some(&k) = set.iter().find(|&&k| k >= networks.len()) {
            return Err(Error::InconsistentMembership { network: k, node });
        }
        sets.push(set);
    }

    let mut local_index = vec![Vec::new(); total];
    for (k, net) in networks.iter().enumerate() {
        for (a, &node) in net.node_ids().iter().enumerate() {
            if node >= total || !sets[node].contains(&k) {
                return Err(Error::InconsistentMembership { network: k, node });
            }
            local_index[node].push((k, a));
        }
    }
    for (node, set) in sets.iter().enumerate() {
        if local_index[node].len() != set.len() {
            let k = set
                .iter()
                .copied()
                .find(|k| !local_index[node].iter().any(|&(kk, _)| kk == *k))
                .unwrap_or_default();
            return Err(Error::InconsistentMembership { network: k, node });
        }
    }

    let memberships: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
    let overlap_set = memberships
        .iter()
        .enumerate()
        .filter(|(_, ks)| ks.len() >= 2)
        .map(|(i, _)| i)
        .collect();
    let composite_targets = memberships
        .iter()
        .map(|ks| {
            let mut t = vec![0.0; m];
            for &k in ks {
                for (acc, x) in t.iter_mut().zip(networks[k].target()) {
                    *acc += x;
                }
            }
            let count = ks.len() as f64;
            t.iter_mut().for_each(|x| *x /= count);
            t
        })
        .collect();
    for idx in &mut local_index {
        idx.sort_unstable();
    }

    Ok(MultiNetworkSystem {
        networks,
        memberships,
        overlap_set,
        composite_targets,
        local_index,
    })
}

impl MultiNetworkSystem {
    /// Wraps one network as a K = 1 system; its node ids must be `0..n`.
    pub fn single(net: DirectedNetwork) -> Result<Self> {
        let memberships = vec![vec![0]; net.n()];
        build_multinetwork(vec![net], memberships)
    }

    /// K.
    pub fn num_networks(&self) -> usize {
        self.networks.len()
    }

    /// N.
    pub fn total_nodes(&self) -> usize {
        self.memberships.len()
    }

    pub fn state_dim(&self) -> usize {
        self.networks[0].state_dim()
    }

    pub fn networks(&self) -> &[DirectedNetwork] {
        &self.networks
    }

    pub fn network(&self, k: usize) -> &DirectedNetwork {
        &self.networks[k]
    }

    /// Sorted network indices node `i` belongs to.
    pub fn membership(&self, node: usize) -> &[usize] {
        &self.memberships[node]
    }

    pub fn memberships(&self) -> &[Vec<usize>] {
        &self.memberships
    }

    pub fn overlap_set(&self) -> &[usize] {
        &self.overlap_set
    }

    pub fn composite_target(&self, node: usize) -> &[f64] {
        &self.composite_targets[node]
    }

    pub fn composite_targets(&self) -> &[Vec<f64>] {
        &self.composite_targets
    }

    /// `(network, local row)` pairs for global node `i`.
    pub fn placements(&self, node: usize) -> &[(usize, usize)] {
        &self.local_index[node]
    }
}

/// Declarative description of how N nodes spread over K networks.
///
/// `multiplicity_counts[r - 1]` is the number of nodes that sit in exactly
/// `r` networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipProfile {
    pub nodes: usize,
    pub network_sizes: Vec<usize>,
    pub multiplicity_counts: Vec<usize>,
}

impl MembershipProfile {
    /// 50 vehicles: networks of 35/25/25, 25 in two networks, 5 in all three.
    pub fn small_50() -> Self {
        Self {
            nodes: 50,
            network_sizes: vec![35, 25, 25],
            multiplicity_counts: vec![20, 25, 5],
        }
    }

    /// 100 vehicles: 70/50/50, 50 in two networks, 10 in all three.
    pub fn medium_100() -> Self {
        Self {
            nodes: 100,
            network_sizes: vec![70, 50, 50],
            multiplicity_counts: vec![40, 50, 10],
        }
    }

    /// 200 vehicles: 140/100/100, 100 in two networks, 20 in all three.
    pub fn large_200() -> Self {
        Self {
            nodes: 200,
            network_sizes: vec![140, 100, 100],
            multiplicity_counts: vec![80, 100, 20],
        }
    }

    /// Every node in one network.
    pub fn single(nodes: usize) -> Self {
        Self {
            nodes,
            network_sizes: vec![nodes],
            multiplicity_counts: vec![nodes],
        }
    }

    pub fn num_networks(&self) -> usize {
        self.network_sizes.len()
    }

    fn validate(&self) -> Result<()> {
        let k = self.network_sizes.len();
        if self.nodes == 0 || k == 0 {
            return Err(Error::InfeasibleProfile("no nodes or no networks".into()));
        }
        let counted: usize = self.multiplicity_counts.iter().sum();
        if counted != self.nodes {
            return Err(Error::InfeasibleProfile(format!(
                "multiplicity counts sum to {counted}, expected {}",
                self.nodes
            )));
        }
        if self.multiplicity_counts.len() > k
            && self.multiplicity_counts[k..].iter().any(|&c| c > 0)
        {
            return Err(Error::InfeasibleProfile(
                "a node cannot belong to more networks than exist".into(),
            ));
        }
        if let Some(&s) = self.network_sizes.iter().find(|&&s| s > self.nodes || s == 0) {
            return Err(Error::InfeasibleProfile(format!(
                "network size {s} outside 1..={}",
                self.nodes
            )));
        }
        let slots: usize = self
            .multiplicity_counts
            .iter()
            .enumerate()
            .map(|(r, c)| (r + 1) * c)
            .sum();
        let capacity: usize = self.network_sizes.iter().sum();
        if slots != capacity {
            return Err(Error::InfeasibleProfile(format!(
                "membership slots {slots} != total network capacity {capacity}"
            )));
        }
        Ok(())
    }
}

/// Assigns nodes to networks so sizes and overlap counts match `profile`
/// exactly. Which node ids overlap is uniformly random given the seed.
pub fn generate_membership(profile: &MembershipProfile, rng_seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    generate_membership_with(profile, &mut rng)
}

pub fn generate_membership_with<R: Rng + ?Sized>(
    profile: &MembershipProfile,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    profile.validate()?;
    let k = profile.num_networks();
    let mut ids: Vec<usize> = (0..profile.nodes).collect();
    ids.shuffle(rng);

    let mut multiplicities = Vec::with_capacity(profile.nodes);
    for (r, &count) in profile.multiplicity_counts.iter().enumerate().rev() {
        multiplicities.extend(std::iter::repeat_n(r + 1, count));
    }

    // Highest multiplicity first, each node into the networks with the most
    // remaining room; this realises any feasible degree pair.
    let mut remaining = profile.network_sizes.clone();
    let mut memberships = vec![Vec::new(); profile.nodes];
    for (&node, &r) in ids.iter().zip(&multiplicities) {
        let mut order: Vec<(usize, u64)> = (0..k).map(|j| (j, rng.random::<u64>())).collect();
        order.sort_by(|a, b| remaining[b.0].cmp(&remaining[a.0]).then(a.1.cmp(&b.1)));
        let chosen: Vec<usize> = order.iter().take(r).map(|&(j, _)| j).collect();
        if chosen.iter().any(|&j| remaining[j] == 0) {
            return Err(Error::InfeasibleProfile(
                "sizes and overlap counts admit no assignment".into(),
            ));
        }
        for &j in &chosen {
            remaining[j] -= 1;
        }
        let mut chosen = chosen;
        chosen.sort_unstable();
        memberships[node] = chosen;
    }
    if remaining.iter().any(|&r| r != 0) {
        return Err(Error::InfeasibleProfile(
            "sizes and overlap counts admit no assignment".into(),
        ));
    }
    Ok(memberships)
}

/// Sorted global node ids of network `k` under `memberships`.
pub fn network_nodes(memberships: &[Vec<usize>], k: usize) -> Vec<usize> {
    memberships
        .iter()
        .enumerate()
        .filter(|(_, ks)| ks.contains(&k))
        .map(|(i, _)| i)
        .collect()
}

/// Writes `g` as dense row-major CSV preceded by a `# n=<N>` header line.
pub fn write_adjacency_csv<W: Write>(g: &DMatrix<f64>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# n={}", g.nrows())?;
    for i in 0..g.nrows() {
        let row: Vec<String> = (0..g.ncols()).map(|j| format!("{}", g[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Parses the format produced by [`write_adjacency_csv`].
pub fn read_adjacency_csv<R: BufRead>(input: R) -> Result<DMatrix<f64>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Csv("missing header".into()))?
        .map_err(|e| Error::Csv(e.to_string()))?;
    let n: usize = header
        .trim()
        .strip_prefix("# n=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Csv(format!("bad header `{header}`")))?;
    if n == 0 {
        return Err(Error::EmptyNetwork);
    }
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for line in lines {
        let line = line.map_err(|e| Error::Csv(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Csv(format!("row {rows}: {e}")))?;
        if vals.len() != n {
            return Err(Error::Csv(format!("row {rows} has {} columns, expected {n}", vals.len())));
        }
        data.extend(vals);
        rows += 1;
    }
    if rows != n {
        return Err(Error::Csv(format!("{rows} rows, expected {n}")));
    }
    let g = DMatrix::from_row_slice(n, n, &data);
    check_adjacency(&g)?;
    Ok(g)
}
