use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
use proptest::sample::select;

use race_core::dynamics::{
    async_step, fermi_probability, fitness, init_population, run_generation, set_zealots,
    DynamicsConfig, PopulationState, Strategy, UpdateRule,
};
use race_core::game::{race_payoff_matrix, RaceParameters};
use race_core::networks::{barabasi_albert, complete, dms, lattice, Graph, Neighborhood, NodeId};
use race_core::seeding::rng_from_seed;

fn early(p_r: f64) -> RaceParameters {
    RaceParameters {
        p_disaster: p_r,
        ..RaceParameters::default()
    }
}

fn graph_for(kind: u8, seed: u64) -> Graph {
    match kind % 4 {
        0 => complete(12).unwrap(),
        1 => lattice(5, Neighborhood::Moore8).unwrap(),
        2 => barabasi_albert(60, 2, seed).unwrap(),
        _ => dms(60, 2, seed).unwrap(),
    }
}

/// Fitness recomputed from scratch by walking the adjacency list.
fn fitness_oracle(
    strategies: &[Strategy],
    g: &Graph,
    params: &RaceParameters,
    node: NodeId,
    normalized: bool,
    bonus: f64,
) -> f64 {
    let m = race_payoff_matrix(params).unwrap();
    let mine = strategies[node as usize];
    let total: f64 = g
        .neighbors(node)
        .iter()
        .map(|&v| m.get(mine, strategies[v as usize]))
        .sum();
    let total = if normalized {
        total / g.degree(node) as f64
    } else {
        total
    };
    total + bonus
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fermi_bounds_and_complement(fa in -1e4f64..1e4, fb in -1e4f64..1e4, beta in 0f64..50.0) {
        let p = fermi_probability(fa, fb, beta);
        let q = fermi_probability(fb, fa, beta);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p + q - 1.0).abs() <= 1e-12, "p={p} q={q}");
    }

    #[test]
    fn fermi_decreases_with_own_fitness(
        fa in -100f64..100.0,
        gap in 0f64..100.0,
        fb in -100f64..100.0,
        beta in 0f64..5.0,
    ) {
        prop_assert!(fermi_probability(fa + gap, fb, beta) <= fermi_probability(fa, fb, beta));
    }

    #[test]
    fn fitness_matches_brute_force(
        kind in any::<u8>(),
        seed in any::<u64>(),
        p_r in 0f64..=1.0,
        normalized in any::<bool>(),
        bonus in select(vec![0.0, 2.0 * 1e4 / 100.0, 1e7]),
    ) {
        let g = graph_for(kind, seed);
        let params = early(p_r);
        let race = race_payoff_matrix(&params).unwrap();
        let mut rng = rng_from_seed(seed);
        let mut state = init_population(&g, &mut rng, 0.5).unwrap();
        set_zealots(&mut state, &g, &[0], Strategy::Safe, bonus).unwrap();
        let cfg = DynamicsConfig { normalized, ..DynamicsConfig::default() };
        // let the caches evolve before checking them
        for _ in 0..3 {
            run_generation(&mut state, &g, &race, &cfg, &mut rng);
        }
        for v in 0..g.node_count() as NodeId {
            let b = if v == 0 { bonus } else { 0.0 };
            let expected = fitness_oracle(state.strategies(), &g, &params, v, normalized, b);
            let got = fitness(&state, &g, &race, v, &cfg);
            prop_assert!((got - expected).abs() <= 1e-9 * expected.abs().max(1.0), "node {v}: {got} vs {expected}");
        }
    }

    #[test]
    fn async_steps_change_at_most_one_node(kind in any::<u8>(), seed in any::<u64>(), p_r in 0f64..=1.0) {
        let g = graph_for(kind, seed);
        let race = race_payoff_matrix(&early(p_r)).unwrap();
        let mut rng = rng_from_seed(seed ^ 1);
        let mut state = init_population(&g, &mut rng, 0.5).unwrap();
        let cfg = DynamicsConfig::default();
        for _ in 0..200 {
            let before = state.strategies().to_vec();
            let before_count = state.unsafe_count();
            let changed = async_step(&mut state, &g, &race, &cfg, &mut rng);
            let diffs: Vec<usize> = (0..before.len()).filter(|&i| before[i] != state.strategies()[i]).collect();
            prop_assert!(diffs.len() <= 1);
            prop_assert_eq!(diffs.first().map(|&i| i as NodeId), changed);
            prop_assert!(state.unsafe_count().abs_diff(before_count) <= 1);
            let recount = state.strategies().iter().filter(|&&s| s == Strategy::Unsafe).count();
            prop_assert_eq!(recount, state.unsafe_count());
        }
    }

    #[test]
    fn zealots_never_move(
        kind in any::<u8>(),
        seed in any::<u64>(),
        p_r in 0f64..=1.0,
        sync in any::<bool>(),
        zealot_unsafe in any::<bool>(),
        bonus in select(vec![0.0, 1e7]),
    ) {
        let g = graph_for(kind, seed);
        let race = race_payoff_matrix(&early(p_r)).unwrap();
        let mut rng = rng_from_seed(seed);
        let mut state = init_population(&g, &mut rng, 0.5).unwrap();
        let pinned = if zealot_unsafe { Strategy::Unsafe } else { Strategy::Safe };
        let zealots: Vec<NodeId> = (0..g.node_count() as NodeId).step_by(7).collect();
        set_zealots(&mut state, &g, &zealots, pinned, bonus).unwrap();
        let cfg = DynamicsConfig {
            update_rule: if sync { UpdateRule::Synchronous } else { UpdateRule::Asynchronous },
            ..DynamicsConfig::default()
        };
        for _ in 0..20 {
            run_generation(&mut state, &g, &race, &cfg, &mut rng);
            for &z in &zealots {
                prop_assert_eq!(state.strategy(z), pinned);
            }
        }
    }

    #[test]
    fn homogeneous_states_are_absorbing(kind in any::<u8>(), seed in any::<u64>(), unsafe_ in any::<bool>()) {
        let g = graph_for(kind, seed);
        let s = if unsafe_ { Strategy::Unsafe } else { Strategy::Safe };
        let mut state = PopulationState::from_strategies(&g, vec![s; g.node_count()]).unwrap();
        let race = race_payoff_matrix(&early(0.5)).unwrap();
        let mut rng = rng_from_seed(seed);
        for _ in 0..5 {
            run_generation(&mut state, &g, &race, &DynamicsConfig::default(), &mut rng);
        }
        prop_assert!(state.strategies().iter().all(|&x| x == s));
    }
}

/// On a 4-regular lattice, dividing payoffs by k = 4 is the same as scaling
/// beta by 1/4; both runs share one RNG stream and must agree step for step.
#[test]
fn regular_lattice_beta_rescaling_is_exact() {
    let g = lattice(8, Neighborhood::Edge4).unwrap();
    for (seed, p_r) in [(1u64, 0.5), (2, 0.2), (3, 0.8), (4, 0.65)] {
        let race = race_payoff_matrix(&early(p_r)).unwrap();
        let normalized = DynamicsConfig {
            normalized: true,
            beta: 1.0,
            ..DynamicsConfig::default()
        };
        let accumulated = DynamicsConfig {
            normalized: false,
            beta: 0.25,
            ..DynamicsConfig::default()
        };
        let mut rng_a = rng_from_seed(seed);
        let mut rng_b = rng_from_seed(seed);
        let mut a = init_population(&g, &mut rng_a, 0.5).unwrap();
        let mut b = init_population(&g, &mut rng_b, 0.5).unwrap();
        for generation in 0..200 {
            run_generation(&mut a, &g, &race, &normalized, &mut rng_a);
            run_generation(&mut b, &g, &race, &accumulated, &mut rng_b);
            assert_eq!(a.strategies(), b.strategies(), "seed {seed}, generation {generation}");
        }
    }
}

#[test]
fn synchronous_rescaling_is_exact_too() {
    let g = lattice(8, Neighborhood::Edge4).unwrap();
    let race = race_payoff_matrix(&early(0.5)).unwrap();
    let sync = |normalized, beta| DynamicsConfig {
        normalized,
        beta,
        update_rule: UpdateRule::Synchronous,
    };
    let mut rng_a = rng_from_seed(9);
    let mut rng_b = rng_from_seed(9);
    let mut a = init_population(&g, &mut rng_a, 0.5).unwrap();
    let mut b = init_population(&g, &mut rng_b, 0.5).unwrap();
    for _ in 0..200 {
        run_generation(&mut a, &g, &race, &sync(true, 1.0), &mut rng_a);
        run_generation(&mut b, &g, &race, &sync(false, 0.25), &mut rng_b);
        assert_eq!(a.strategies(), b.strategies());
    }
}
