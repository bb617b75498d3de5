mod common;

use common::{exhaustive_min_count, lmi_matrix};
use nalgebra::DMatrix;
use pinning::ga::{
    crossover, evolve, fitness, init_population, mutate, tournament_select, Chromosome, CrossoverKind, GaConfig,
    PenaltySchedule,
};
use pinning::network::{build_multinetwork, generate_adjacency, laplacian, network_nodes, DirectedNetwork};
use pinning::stability::StabilityParams;
use pinning::MultiNetworkSystem;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random overlapping system: each node joins a nonempty subset of K networks.
fn system() -> impl Strategy<Value = MultiNetworkSystem> {
    (1usize..=3, 2usize..=7, any::<u64>()).prop_flat_map(|(k, n, seed)| {
        proptest::collection::vec(1u8..(1 << k), n).prop_map(move |masks| {
            let mut memberships: Vec<Vec<usize>> = masks
                .iter()
                .map(|m| (0..k).filter(|b| m >> b & 1 == 1).collect())
                .collect();
            // every network needs a member
            for net in 0..k {
                if network_nodes(&memberships, net).is_empty() {
                    memberships[net % n].push(net);
                    memberships[net % n].sort_unstable();
                    memberships[net % n].dedup();
                }
            }
            let networks = (0..k)
                .map(|net| {
                    let ids = network_nodes(&memberships, net);
                    let g = generate_adjacency(ids.len(), 0.5, seed.wrapping_add(net as u64)).unwrap();
                    let target = 10.0 * (net as f64 + 1.0);
                    DirectedNetwork::with_node_ids(g, 0.8, 1.0, vec![target], ids).unwrap()
                })
                .collect();
            build_multinetwork(networks, memberships).unwrap()
        })
    })
}

fn random_chromosome(sys: &MultiNetworkSystem, seed: u64, p: f64) -> Chromosome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    mutate(&Chromosome::filled(sys, false), p, &mut rng)
}

fn small_cfg(seed: u64) -> GaConfig {
    GaConfig {
        population_size: 6,
        generations: 4,
        rng_seed: seed,
        parallel: false,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(common::cases(1000))]

    #[test]
    fn best_fitness_never_worsens(sys in system(), seed in any::<u64>(), delta in 0.5f64..5.0) {
        let mut cfg = small_cfg(seed);
        cfg.stability.delta = delta;
        let report = evolve(&cfg, &sys).unwrap();
        prop_assert_eq!(report.history.len(), cfg.generations + 1);
        for w in report.history.windows(2) {
            prop_assert!(w[1].best_fitness <= w[0].best_fitness);
        }
        prop_assert_eq!(report.best_fitness, report.history.last().unwrap().best_fitness);
    }

    #[test]
    fn overlapping_nodes_count_once(sys in system(), seed in any::<u64>(), p in 0.0f64..1.0) {
        let ch = random_chromosome(&sys, seed, p);
        let cfg = GaConfig { stability: StabilityParams { delta: 2.0, ..Default::default() }, ..Default::default() };
        let (fit, eval) = fitness(&ch, &sys, &cfg).unwrap();

        let distinct = (0..sys.total_nodes())
            .filter(|&i| sys.membership(i).iter().any(|&k| ch.gene(&sys, i, k) == Some(true)))
            .count();
        let raw_bits: usize = ch.genes().iter().flatten().filter(|&&b| b).count();
        prop_assert_eq!(eval.pinned_count, distinct);
        prop_assert!(distinct <= raw_bits);

        // penalty recomputed from scratch at c_max
        let mut xi = 0.0;
        let mut all_ok = true;
        for (k, net) in sys.networks().iter().enumerate() {
            let ls = laplacian(net.adjacency()).unwrap().symmetric_part;
            let m = lmi_matrix(&ls, &ch.genes()[k], 0.8, 50.0, 1.0);
            let ok = common::jacobi_min(&m) >= 2.0;
            prop_assume!((common::jacobi_min(&m) - 2.0).abs() > 1e-9);
            if !ok {
                all_ok = false;
                xi += (m - DMatrix::identity(net.n(), net.n()) * 2.0).norm();
            }
        }
        prop_assert_eq!(eval.feasible, all_ok);
        if all_ok {
            prop_assert_eq!(fit, distinct as f64);
        } else {
            prop_assert!((fit - (distinct as f64 + 10.0 * xi)).abs() < 1e-9 * fit.max(1.0));
        }
    }

    #[test]
    fn reruns_are_byte_identical(sys in system(), seed in any::<u64>()) {
        let cfg = small_cfg(seed);
        let a = evolve(&cfg, &sys).unwrap();
        let b = evolve(&GaConfig { parallel: true, ..cfg.clone() }, &sys).unwrap();
        prop_assert_eq!(&a, &b);
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_history_csv(&mut ca).unwrap();
        b.write_history_csv(&mut cb).unwrap();
        prop_assert_eq!(ca, cb);
    }

    #[test]
    fn crossover_conserves_genes_per_position(sys in system(), s1 in any::<u64>(), s2 in any::<u64>(), one_point in any::<bool>()) {
        let a = random_chromosome(&sys, s1, 0.5);
        let b = random_chromosome(&sys, s2, 0.5);
        let kind = if one_point { CrossoverKind::OnePoint } else { CrossoverKind::Uniform };
        let mut rng = ChaCha8Rng::seed_from_u64(s1 ^ s2);
        let (c1, c2) = crossover(&a, &b, 1.0, kind, &mut rng).unwrap();
        let flat = |c: &Chromosome| c.genes().iter().flatten().copied().collect::<Vec<_>>();
        let (fa, fb, f1, f2) = (flat(&a), flat(&b), flat(&c1), flat(&c2));
        for i in 0..fa.len() {
            prop_assert!((f1[i], f2[i]) == (fa[i], fb[i]) || (f1[i], f2[i]) == (fb[i], fa[i]));
        }
        if one_point {
            // children are a prefix of one parent and a suffix of the other
            let cut = (0..fa.len()).find(|&i| f1[i] != fa[i]).unwrap_or(fa.len());
            prop_assert!(f1[cut..].iter().zip(&fb[cut..]).all(|(x, y)| x == y));
        }
        for (g, net) in c1.genes().iter().zip(sys.networks()) {
            prop_assert_eq!(g.len(), net.n());
        }
    }
}

#[test]
fn init_probability_sets_mean_pin_count() {
    let net = DirectedNetwork::new(DMatrix::zeros(50, 50), 0.8, 1.0, vec![0.0]).unwrap();
    let sys = MultiNetworkSystem::single(net).unwrap();
    let cfg = GaConfig {
        population_size: 10_000,
        init_prob: 0.2,
        rng_seed: 11,
        ..Default::default()
    };
    let pop = init_population(&cfg, &sys);
    let mean = pop.iter().map(|c| c.pinned_count(&sys)).sum::<usize>() as f64 / pop.len() as f64;
    assert!((mean - 10.0).abs() < 0.3, "{mean}");
}

#[test]
fn mutation_rate_matches_probability() {
    let net = DirectedNetwork::new(DMatrix::zeros(200, 200), 0.8, 1.0, vec![0.0]).unwrap();
    let sys = MultiNetworkSystem::single(net).unwrap();
    let zero = Chromosome::filled(&sys, false);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let flips: usize = (0..500).map(|_| mutate(&zero, 0.05, &mut rng).pinned_count(&sys)).sum();
    let rate = flips as f64 / (500.0 * 200.0);
    assert!((rate - 0.05).abs() < 0.003, "{rate}");
}

#[test]
fn large_tournaments_pick_the_best() {
    let scores: Vec<(f64, usize)> = (0..20).map(|i| ((20 - i) as f64, 0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let wins = (0..200)
        .filter(|_| tournament_select(&scores, 200, &mut rng).unwrap() == 19)
        .count();
    assert!(wins > 190);
    // size one is a uniform draw
    let mut hits = [0usize; 20];
    for _ in 0..20_000 {
        hits[tournament_select(&scores, 1, &mut rng).unwrap()] += 1;
    }
    assert!(hits.iter().all(|&h| (800..1200).contains(&h)), "{hits:?}");
}

#[test]
fn ga_never_beats_exhaustive_minimum() {
    let mut feasible = 0;
    for seed in 0..30u64 {
        let g = generate_adjacency(6, 0.5, seed).unwrap();
        let ls = laplacian(&g).unwrap().symmetric_part;
        let net = DirectedNetwork::new(g, 0.8, 1.0, vec![1.0]).unwrap();
        let sys = MultiNetworkSystem::single(net).unwrap();
        let cfg = GaConfig {
            population_size: 16,
            generations: 15,
            rng_seed: seed,
            ..Default::default()
        };
        let report = evolve(&cfg, &sys).unwrap();
        let oracle = exhaustive_min_count(&ls, 0.8, 1.0, 1.0, 50.0).unwrap();
        if report.feasible() {
            feasible += 1;
            assert!(report.pinned_count() >= oracle, "seed {seed}");
        }
    }
    assert!(feasible >= 25, "{feasible}/30 feasible");
}

#[test]
fn adaptive_penalty_grows_linearly() {
    let net = DirectedNetwork::new(DMatrix::zeros(4, 4), 0.8, 1.0, vec![0.0]).unwrap();
    let sys = MultiNetworkSystem::single(net).unwrap();
    // nothing is ever feasible: fitness is pins + λ_gen·ξ
    let cfg = GaConfig {
        population_size: 4,
        generations: 4,
        init_prob: 0.0,
        mutation_prob: 0.0,
        penalty_schedule: PenaltySchedule::Linear,
        stability: StabilityParams {
            delta: 1e4,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = evolve(&cfg, &sys).unwrap();
    let xi = report.best_evaluation.xi;
    for h in &report.history {
        let lambda = 10.0 * (1.0 + h.generation as f64 / 4.0);
        assert!((h.best_fitness - lambda * xi).abs() < 1e-9 * h.best_fitness);
    }
}

#[test]
fn chromosome_shape_is_checked() {
    let net = DirectedNetwork::new(DMatrix::zeros(3, 3), 0.8, 1.0, vec![0.0]).unwrap();
    let sys = MultiNetworkSystem::single(net).unwrap();
    assert!(Chromosome::from_genes(&sys, vec![vec![true; 4]]).is_err());
    assert!(Chromosome::from_genes(&sys, vec![vec![true; 3], vec![]]).is_err());
    assert!(Chromosome::from_genes(&sys, vec![vec![true; 3]]).is_ok());
}
