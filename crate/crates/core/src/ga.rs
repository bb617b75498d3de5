//! Genetic search over binary pinning matrices.
//!
//! Each individual carries one bit per (node, network) membership. Fitness is
//! the number of distinct pinned nodes, plus `λ·ξ` when some network's LMI
//! cannot be satisfied. Survivors are the best `N_pop` of parents and
//! offspring combined, so the best fitness never gets worse.

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::MultiNetworkSystem;
use crate::plan::PinningPlan;
use crate::stability::{evaluate_pinning, FeasibilityResult, GainMode, StabilityParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverKind {
    /// Every gene swaps between the children with probability 1/2.
    Uniform,
    /// Genes after a random cut point (in flattened order) swap.
    OnePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltySchedule {
    Constant,
    /// `λ_gen = λ·(1 + gen/N_gen)`.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Probability that a gene starts at 1.
    pub init_prob: f64,
    /// Penalty coefficient λ.
    pub penalty_coeff: f64,
    pub tournament_size: usize,
    pub rng_seed: u64,
    pub stability: StabilityParams,
    pub gain_mode: GainMode,
    pub crossover: CrossoverKind,
    pub penalty_schedule: PenaltySchedule,
    /// Evaluate fitness on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            generations: 20,
            crossover_prob: 0.8,
            mutation_prob: 0.05,
            init_prob: 0.3,
            penalty_coeff: 10.0,
            tournament_size: 2,
            rng_seed: 0,
            stability: StabilityParams::default(),
            gain_mode: GainMode::Minimal,
            crossover: CrossoverKind::Uniform,
            penalty_schedule: PenaltySchedule::Constant,
            parallel: true,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
            ("init_prob", self.init_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(name, format!("{p} not in [0, 1]")));
            }
        }
        if self.population_size == 0 {
            return Err(Error::param("population_size", "must be >= 1"));
        }
        if self.tournament_size == 0 {
            return Err(Error::param("tournament_size", "must be >= 1"));
        }
        if !(self.penalty_coeff >= 0.0 && self.penalty_coeff.is_finite()) {
            return Err(Error::param("penalty_coeff", "must be >= 0"));
        }
        if let GainMode::Fixed(c) = self.gain_mode {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::param("gain_mode", format!("fixed gain {c} must be > 0")));
            }
        }
        self.stability.validate()
    }

    fn penalty_at(&self, generation: usize) -> f64 {
        match self.penalty_schedule {
            PenaltySchedule::Constant => self.penalty_coeff,
            PenaltySchedule::Linear if self.generations > 0 => {
                self.penalty_coeff * (1.0 + generation as f64 / self.generations as f64)
            }
            PenaltySchedule::Linear => self.penalty_coeff,
        }
    }
}

/// Pinning bits, stored per network over that network's local rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chromosome {
    genes: Vec<Vec<bool>>,
}

impl Chromosome {
    pub fn filled(sys: &MultiNetworkSystem, value: bool) -> Self {
        Self {
            genes: sys.networks().iter().map(|n| vec![value; n.n()]).collect(),
        }
    }

    pub fn from_genes(sys: &MultiNetworkSystem, genes: Vec<Vec<bool>>) -> Result<Self> {
        if genes.len() != sys.num_networks() {
            return Err(Error::DimensionMismatch {
                what: "chromosome networks",
                expected: sys.num_networks(),
                got: genes.len(),
            });
        }
        for (net, g) in sys.networks().iter().zip(&genes) {
            if g.len() != net.n() {
                return Err(Error::DimensionMismatch {
                    what: "chromosome genes vs network size",
                    expected: net.n(),
                    got: g.len(),
                });
            }
        }
        Ok(Self { genes })
    }

    /// Pins given as global node ids per network.
    pub fn from_global_pins(sys: &MultiNetworkSystem, pinned: &[(usize, usize)]) -> Result<Self> {
        let mut ch = Self::filled(sys, false);
        for &(node, k) in pinned {
            let local = sys
                .placements(node)
                .iter()
                .find(|&&(kk, _)| kk == k)
                .map(|&(_, a)| a)
                .ok_or(Error::InconsistentMembership { network: k, node })?;
            ch.genes[k][local] = true;
        }
        Ok(ch)
    }

    pub fn genes(&self) -> &[Vec<bool>] {
        &self.genes
    }

    /// `dᵢ⁽ᵏ⁾`, or `None` when node `i` is not in network `k`.
    pub fn gene(&self, sys: &MultiNetworkSystem, node: usize, k: usize) -> Option<bool> {
        sys.placements(node)
            .iter()
            .find(|&&(kk, _)| kk == k)
            .map(|&(_, a)| self.genes[k][a])
    }

    pub fn gene_count(&self) -> usize {
        self.genes.iter().map(Vec::len).sum()
    }

    /// `𝒟ᵢ = max_k dᵢ⁽ᵏ⁾`.
    pub fn aggregated(&self, sys: &MultiNetworkSystem) -> Vec<bool> {
        (0..sys.total_nodes())
            .map(|i| sys.placements(i).iter().any(|&(k, a)| self.genes[k][a]))
            .collect()
    }

    pub fn pinned_count(&self, sys: &MultiNetworkSystem) -> usize {
        self.aggregated(sys).into_iter().filter(|&p| p).count()
    }

    pub fn bitstrings(&self) -> Vec<String> {
        self.genes
            .iter()
            .map(|g| g.iter().map(|&b| if b { '1' } else { '0' }).collect())
            .collect()
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.genes.len() == other.genes.len()
            && self.genes.iter().zip(&other.genes).all(|(a, b)| a.len() == b.len())
    }
}

/// Cached result of testing a chromosome against every network's LMI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub pinned_count: usize,
    pub per_network: Vec<FeasibilityResult>,
    /// `ξ_m = Σ_k ξ_k`.
    pub xi: f64,
    pub feasible: bool,
}

impl Evaluation {
    pub fn fitness(&self, penalty: f64) -> f64 {
        if self.feasible {
            self.pinned_count as f64
        } else {
            self.pinned_count as f64 + penalty * self.xi
        }
    }

    pub fn gains(&self) -> Vec<Option<f64>> {
        self.per_network.iter().map(|r| r.gain).collect()
    }
}

/// Memoising LMI evaluator; networks are cached independently.
struct Evaluator<'a> {
    sys: &'a MultiNetworkSystem,
    cfg: &'a GaConfig,
    cache: Vec<HashMap<Vec<bool>, FeasibilityResult>>,
    lmi_evaluations: usize,
}

impl<'a> Evaluator<'a> {
    fn new(sys: &'a MultiNetworkSystem, cfg: &'a GaConfig) -> Self {
        Self {
            sys,
            cfg,
            cache: vec![HashMap::new(); sys.num_networks()],
            lmi_evaluations: 0,
        }
    }

    fn solve(&self, k: usize, genes: &[bool]) -> Result<FeasibilityResult> {
        let net = self.sys.network(k);
        evaluate_pinning(
            &net.laplacian().symmetric_part,
            genes,
            net.coupling_strength(),
            net.gamma(),
            self.cfg.gain_mode,
            &self.cfg.stability,
        )
    }

    fn evaluate_all(&mut self, batch: &[Chromosome]) -> Result<Vec<Evaluation>> {
        let mut missing: Vec<(usize, Vec<bool>)> = Vec::new();
        for ch in batch {
            for (k, g) in ch.genes.iter().enumerate() {
                if !self.cache[k].contains_key(g) && !missing.iter().any(|(kk, gg)| *kk == k && gg == g) {
                    missing.push((k, g.clone()));
                }
            }
        }
        let solved: Vec<Result<FeasibilityResult>> = if self.cfg.parallel {
            missing.par_iter().map(|(k, g)| self.solve(*k, g)).collect()
        } else {
            missing.iter().map(|(k, g)| self.solve(*k, g)).collect()
        };
        self.lmi_evaluations += missing.len();
        for ((k, g), r) in missing.into_iter().zip(solved) {
            self.cache[k].insert(g, r?);
        }
        Ok(batch
            .iter()
            .map(|ch| {
                let per_network: Vec<FeasibilityResult> = ch
                    .genes
                    .iter()
                    .enumerate()
                    .map(|(k, g)| self.cache[k][g])
                    .collect();
                let feasible = per_network.iter().all(|r| r.feasible);
                Evaluation {
                    pinned_count: ch.pinned_count(self.sys),
                    xi: per_network.iter().map(|r| r.xi).sum(),
                    per_network,
                    feasible,
                }
            })
            .collect())
    }
}

fn check_shape(ch: &Chromosome, sys: &MultiNetworkSystem) -> Result<()> {
    Chromosome::from_genes(sys, ch.genes.clone()).map(|_| ())
}

/// Fitness at the configured (generation-0) penalty coefficient.
pub fn fitness(ch: &Chromosome, sys: &MultiNetworkSystem, cfg: &GaConfig) -> Result<(f64, Evaluation)> {
    check_shape(ch, sys)?;
    cfg.validate()?;
    let mut ev = Evaluator::new(sys, cfg);
    let eval = ev.evaluate_all(std::slice::from_ref(ch))?.remove(0);
    Ok((eval.fitness(cfg.penalty_coeff), eval))
}

/// Random initial population, every gene 1 with probability `init_prob`.
pub fn init_population(cfg: &GaConfig, sys: &MultiNetworkSystem) -> Vec<Chromosome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    init_population_with(cfg, sys, &mut rng)
}

pub fn init_population_with<R: Rng + ?Sized>(
    cfg: &GaConfig,
    sys: &MultiNetworkSystem,
    rng: &mut R,
) -> Vec<Chromosome> {
    (0..cfg.population_size)
        .map(|_| Chromosome {
            genes: sys
                .networks()
                .iter()
                .map(|n| (0..n.n()).map(|_| rng.random_bool(cfg.init_prob)).collect())
                .collect(),
        })
        .collect()
}

/// Tournament of size `k` drawn with replacement over `(fitness, pinned)`
/// scores; returns the winner's index. Ties go to fewer pinned nodes, then to
/// the lower index.
pub fn tournament_select<R: Rng + ?Sized>(
    scores: &[(f64, usize)],
    k: usize,
    rng: &mut R,
) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::Empty("population"));
    }
    if k == 0 {
        return Err(Error::param("tournament_size", "must be >= 1"));
    }
    let key = |i: usize| (scores[i].0, scores[i].1, i);
    let mut best = rng.random_range(0..scores.len());
    for _ in 1..k {
        let c = rng.random_range(0..scores.len());
        let (fc, pc, ic) = key(c);
        let (fb, pb, ib) = key(best);
        if fc.total_cmp(&fb).then(pc.cmp(&pb)).then(ic.cmp(&ib)).is_lt() {
            best = c;
        }
    }
    Ok(best)
}

/// With probability `p_c` recombines the parents, otherwise copies them.
pub fn crossover<R: Rng + ?Sized>(
    a: &Chromosome,
    b: &Chromosome,
    p_c: f64,
    kind: CrossoverKind,
    rng: &mut R,
) -> Result<(Chromosome, Chromosome)> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch {
            what: "crossover parents",
            expected: a.gene_count(),
            got: b.gene_count(),
        });
    }
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    if !rng.random_bool(p_c) {
        return Ok((c1, c2));
    }
    match kind {
        CrossoverKind::Uniform => {
            for (g1, g2) in c1.genes.iter_mut().zip(c2.genes.iter_mut()) {
                for (x, y) in g1.iter_mut().zip(g2.iter_mut()) {
                    if rng.random_bool(0.5) {
                        std::mem::swap(x, y);
                    }
                }
            }
        }
        CrossoverKind::OnePoint => {
            let total = a.gene_count();
            if total > 1 {
                let cut = rng.random_range(1..total);
                let mut pos = 0;
                for (g1, g2) in c1.genes.iter_mut().zip(c2.genes.iter_mut()) {
                    for (x, y) in g1.iter_mut().zip(g2.iter_mut()) {
                        if pos >= cut {
                            std::mem::swap(x, y);
                        }
                        pos += 1;
                    }
                }
            }
        }
    }
    Ok((c1, c2))
}

/// Flips every gene independently with probability `p_m`.
pub fn mutate<R: Rng + ?Sized>(ch: &Chromosome, p_m: f64, rng: &mut R) -> Chromosome {
    let mut out = ch.clone();
    for g in out.genes.iter_mut().flatten() {
        if rng.random_bool(p_m) {
            *g = !*g;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_pinned: usize,
    pub feasible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaReport {
    pub best: Chromosome,
    pub best_evaluation: Evaluation,
    pub best_fitness: f64,
    /// Generation 0 is the initial population.
    pub history: Vec<GenerationStats>,
    pub lmi_evaluations: usize,
}

impl GaReport {
    pub fn feasible(&self) -> bool {
        self.best_evaluation.feasible
    }

    pub fn pinned_count(&self) -> usize {
        self.best_evaluation.pinned_count
    }

    /// The best chromosome with its gains, if every network is feasible.
    pub fn plan(&self, sys: &MultiNetworkSystem) -> Option<PinningPlan> {
        let gains: Option<Vec<f64>> = self.best_evaluation.gains().into_iter().collect();
        PinningPlan::new(sys, self.best.genes.clone(), gains?).ok()
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "feasible": self.feasible(),
            "pinned_count": self.pinned_count(),
            "best_fitness": self.best_fitness,
            "best_genes": self.best.bitstrings(),
            "gains": self.best_evaluation.gains(),
            "xi": self.best_evaluation.xi,
            "lmi_evaluations": self.lmi_evaluations,
            "best_fitness_series": self.history.iter().map(|h| h.best_fitness).collect::<Vec<_>>(),
        })
    }

    pub fn write_history_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "generation,best_fitness,mean_fitness,best_pinned,feasible_fraction")?;
        for h in &self.history {
            writeln!(
                out,
                "{},{},{},{},{}",
                h.generation, h.best_fitness, h.mean_fitness, h.best_pinned, h.feasible_fraction
            )?;
        }
        Ok(())
    }
}

struct Member {
    ch: Chromosome,
    eval: Evaluation,
}

fn rank(pop: &mut [Member], penalty: f64) {
    // stable: equal (fitness, pinned) keep their incoming order
    pop.sort_by(|a, b| {
        a.eval
            .fitness(penalty)
            .total_cmp(&b.eval.fitness(penalty))
            .then(a.eval.pinned_count.cmp(&b.eval.pinned_count))
    });
}

fn stats(generation: usize, pop: &[Member], penalty: f64) -> GenerationStats {
    let n = pop.len() as f64;
    GenerationStats {
        generation,
        best_fitness: pop[0].eval.fitness(penalty),
        mean_fitness: pop.iter().map(|m| m.eval.fitness(penalty)).sum::<f64>() / n,
        best_pinned: pop[0].eval.pinned_count,
        feasible_fraction: pop.iter().filter(|m| m.eval.feasible).count() as f64 / n,
    }
}

/// Runs the full selection / crossover / mutation / truncation loop.
pub fn evolve(cfg: &GaConfig, sys: &MultiNetworkSystem) -> Result<GaReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut evaluator = Evaluator::new(sys, cfg);

    let initial = init_population_with(cfg, sys, &mut rng);
    let evals = evaluator.evaluate_all(&initial)?;
    let mut pop: Vec<Member> = initial
        .into_iter()
        .zip(evals)
        .map(|(ch, eval)| Member { ch, eval })
        .collect();
    let penalty0 = cfg.penalty_at(0);
    rank(&mut pop, penalty0);
    let mut history = vec![stats(0, &pop, penalty0)];

    for generation in 1..=cfg.generations {
        let penalty = cfg.penalty_at(generation);
        let scores: Vec<(f64, usize)> = pop
            .iter()
            .map(|m| (m.eval.fitness(penalty), m.eval.pinned_count))
            .collect();

        let mut offspring = Vec::with_capacity(cfg.population_size + 1);
        while offspring.len() < cfg.population_size {
            let a = tournament_select(&scores, cfg.tournament_size, &mut rng)?;
            let b = tournament_select(&scores, cfg.tournament_size, &mut rng)?;
            let (c1, c2) = crossover(&pop[a].ch, &pop[b].ch, cfg.crossover_prob, cfg.crossover, &mut rng)?;
            offspring.push(mutate(&c1, cfg.mutation_prob, &mut rng));
            offspring.push(mutate(&c2, cfg.mutation_prob, &mut rng));
        }
        offspring.truncate(cfg.population_size);

        let evals = evaluator.evaluate_all(&offspring)?;
        pop.extend(
            offspring
                .into_iter()
                .zip(evals)
                .map(|(ch, eval)| Member { ch, eval }),
        );
        rank(&mut pop, penalty);
        pop.truncate(cfg.population_size);
        history.push(stats(generation, &pop, penalty));
    }

    let penalty = cfg.penalty_at(cfg.generations);
    let best = pop.swap_remove(0);
    Ok(GaReport {
        best_fitness: best.eval.fitness(penalty),
        best: best.ch,
        best_evaluation: best.eval,
        history,
        lmi_evaluations: evaluator.lmi_evaluations,
    })
}
