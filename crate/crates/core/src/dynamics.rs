//! Pairwise-comparison (Fermi) imitation on a graph.
//!
//! Fitness is the sum of race payoffs against every neighbour, optionally
//! divided by degree, plus an exogenous interference bonus. Zealots hold a
//! fixed strategy: they can be imitated but never imitate.
//!
//! Asynchronous steps consume exactly three draws in this order: focal node
//! (`gen_range(0..Z)`), model among the focal's neighbours
//! (`gen_range(0..k)`), acceptance (`gen::<f64>()`). The draws are made even
//! when the outcome is already decided, so trajectories depend only on the
//! seed.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::PayoffMatrix2;
pub use crate::game::Strategy;
use crate::networks::{Graph, NodeId};

/// Exponent bound for the Fermi function; past it the probability
/// saturates at exactly 0 or 1.
pub const FERMI_EXPONENT_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateRule {
    Asynchronous,
    Synchronous,
}

impl UpdateRule {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateRule::Asynchronous => "async",
            UpdateRule::Synchronous => "sync",
        }
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "async" | "asynchronous" => Ok(UpdateRule::Asynchronous),
            "sync" | "synchronous" => Ok(UpdateRule::Synchronous),
            other => Err(Error::invalid(
                "update_rule",
                format!("expected async or sync, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    /// Divide accumulated payoffs by the node's degree.
    pub normalized: bool,
    pub update_rule: UpdateRule,
    pub beta: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            normalized: false,
            update_rule: UpdateRule::Asynchronous,
            beta: 1.0,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) {
            return Err(Error::invalid("beta", format!("must be >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

/// Strategies, zealot pins and interference bonuses of every node.
///
/// Also keeps the number of AS neighbours of each node so that fitness is
/// O(1); the count is maintained on every strategy change.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    strategies: Vec<Strategy>,
    zealot_of: Vec<Option<Strategy>>,
    interference: Vec<f64>,
    safe_neighbors: Vec<u32>,
    unsafe_count: usize,
    zealot_count: usize,
}

impl PopulationState {
    pub fn from_strategies(g: &Graph, strategies: Vec<Strategy>) -> Result<Self> {
        let n = g.node_count();
        if strategies.len() != n {
            return Err(Error::invalid(
                "strategies",
                format!("expected {n} entries, got {}", strategies.len()),
            ));
        }
        let safe_neighbors = (0..n as NodeId)
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .filter(|&&u| strategies[u as usize] == Strategy::Safe)
                    .count() as u32
            })
            .collect();
        let unsafe_count = strategies.iter().filter(|&&s| s == Strategy::Unsafe).count();
        Ok(PopulationState {
            strategies,
            zealot_of: vec![None; n],
            interference: vec![0.0; n],
            safe_neighbors,
            unsafe_count,
            zealot_count: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    #[inline]
    pub fn strategy(&self, node: NodeId) -> Strategy {
        self.strategies[node as usize]
    }

    pub fn strategies(&self) -> &[Strategy] {
        &self.strategies
    }

    #[inline]
    pub fn zealot_of(&self, node: NodeId) -> Option<Strategy> {
        self.zealot_of[node as usize]
    }

    #[inline]
    pub fn is_zealot(&self, node: NodeId) -> bool {
        self.zealot_of[node as usize].is_some()
    }

    #[inline]
    pub fn interference(&self, node: NodeId) -> f64 {
        self.interference[node as usize]
    }

    pub fn set_interference(&mut self, node: NodeId, bonus: f64) {
        self.interference[node as usize] = bonus;
    }

    #[inline]
    pub fn safe_neighbor_count(&self, node: NodeId) -> usize {
        self.safe_neighbors[node as usize] as usize
    }

    pub fn unsafe_count(&self) -> usize {
        self.unsafe_count
    }

    pub fn zealot_count(&self) -> usize {
        self.zealot_count
    }

    pub fn unsafe_fraction(&self) -> f64 {
        self.unsafe_count as f64 / self.len() as f64
    }

    /// Changes one strategy and patches the neighbour counts. Ignores zealot
    /// pins; callers decide whether a node may change.
    fn assign(&mut self, g: &Graph, node: NodeId, strategy: Strategy) {
        let old = self.strategies[node as usize];
        if old == strategy {
            return;
        }
        self.strategies[node as usize] = strategy;
        match strategy {
            Strategy::Safe => {
                self.unsafe_count -= 1;
                for &u in g.neighbors(node) {
                    self.safe_neighbors[u as usize] += 1;
                }
            }
            Strategy::Unsafe => {
                self.unsafe_count += 1;
                for &u in g.neighbors(node) {
                    self.safe_neighbors[u as usize] -= 1;
                }
            }
        }
    }
}

/// Random initial configuration: each node is AS with probability
/// `safe_fraction`, drawn in node order.
pub fn init_population<R: Rng + ?Sized>(
    g: &Graph,
    rng: &mut R,
    safe_fraction: f64,
) -> Result<PopulationState> {
    if !(0.0..=1.0).contains(&safe_fraction) {
        return Err(Error::invalid(
            "safe_fraction",
            format!("must lie in [0, 1], got {safe_fraction}"),
        ));
    }
    let strategies = (0..g.node_count())
        .map(|_| {
            if rng.gen::<f64>() < safe_fraction {
                Strategy::Safe
            } else {
                Strategy::Unsafe
            }
        })
        .collect();
    PopulationState::from_strategies(g, strategies)
}

/// Pins `nodes` to `strategy` and records `bonus` as their interference.
/// Repeated ids are harmless.
pub fn set_zealots(
    state: &mut PopulationState,
    g: &Graph,
    nodes: &[NodeId],
    strategy: Strategy,
    bonus: f64,
) -> Result<()> {
    if let Some(&bad) = nodes.iter().find(|&&v| v as usize >= state.len()) {
        return Err(Error::invalid(
            "zealots",
            format!("node {bad} is outside 0..{}", state.len()),
        ));
    }
    if !bonus.is_finite() {
        return Err(Error::invalid("interference", format!("must be finite, got {bonus}")));
    }
    for &v in nodes {
        if state.zealot_of[v as usize].is_none() {
            state.zealot_count += 1;
        }
        state.zealot_of[v as usize] = Some(strategy);
        state.interference[v as usize] = bonus;
        state.assign(g, v, strategy);
    }
    Ok(())
}

#[inline]
pub fn fitness(
    state: &PopulationState,
    g: &Graph,
    race: &PayoffMatrix2,
    node: NodeId,
    cfg: &DynamicsConfig,
) -> f64 {
    let k = g.degree(node);
    let safe = state.safe_neighbor_count(node);
    let row = &race.entries[state.strategy(node).index()];
    let mut f = safe as f64 * row[0] + (k - safe) as f64 * row[1];
    if cfg.normalized {
        f /= k as f64;
    }
    f + state.interference(node)
}

/// Probability that a node with fitness `fa` copies one with fitness `fb`.
#[inline]
pub fn fermi_probability(fa: f64, fb: f64, beta: f64) -> f64 {
    let x = beta * (fa - fb);
    if x.is_nan() {
        // beta = inf with equal fitness
        return 0.5;
    }
    if x >= FERMI_EXPONENT_CLAMP {
        0.0
    } else if x <= -FERMI_EXPONENT_CLAMP {
        1.0
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// One asynchronous imitation attempt. Returns the node that changed
/// strategy, if any.
pub fn async_step<R: Rng + ?Sized>(
    state: &mut PopulationState,
    g: &Graph,
    race: &PayoffMatrix2,
    cfg: &DynamicsConfig,
    rng: &mut R,
) -> Option<NodeId> {
    let focal = rng.gen_range(0..g.node_count()) as NodeId;
    let neighbors = g.neighbors(focal);
    let model = neighbors[rng.gen_range(0..neighbors.len())];
    let draw = rng.gen::<f64>();

    if state.is_zealot(focal) {
        return None;
    }
    let target = state.strategy(model);
    if state.strategy(focal) == target {
        return None;
    }
    let p = fermi_probability(
        fitness(state, g, race, focal, cfg),
        fitness(state, g, race, model, cfg),
        cfg.beta,
    );
    if draw < p {
        state.assign(g, focal, target);
        Some(focal)
    } else {
        None
    }
}

/// One synchronous generation: every non-zealot node compares itself with a
/// random neighbour using fitness from the start of the generation, and all
/// adoptions are committed together. Nodes draw in id order, two draws each
/// (model, acceptance); zealots draw nothing. Returns the number of changes.
pub fn sync_generation<R: Rng + ?Sized>(
    state: &mut PopulationState,
    g: &Graph,
    race: &PayoffMatrix2,
    cfg: &DynamicsConfig,
    rng: &mut R,
) -> usize {
    let n = g.node_count() as NodeId;
    let snapshot: Vec<f64> = (0..n).map(|v| fitness(state, g, race, v, cfg)).collect();
    let mut adoptions: Vec<(NodeId, Strategy)> = Vec::new();
    for v in 0..n {
        if state.is_zealot(v) {
            continue;
        }
        let neighbors = g.neighbors(v);
        let model = neighbors[rng.gen_range(0..neighbors.len())];
        let draw = rng.gen::<f64>();
        let target = state.strategy(model);
        if target != state.strategy(v)
            && draw < fermi_probability(snapshot[v as usize], snapshot[model as usize], cfg.beta)
        {
            adoptions.push((v, target));
        }
    }
    for &(v, s) in &adoptions {
        state.assign(g, v, s);
    }
    adoptions.len()
}

/// Advances one generation under `cfg.update_rule`: `Z` asynchronous steps,
/// or one synchronous sweep.
pub fn run_generation<R: Rng + ?Sized>(
    state: &mut PopulationState,
    g: &Graph,
    race: &PayoffMatrix2,
    cfg: &DynamicsConfig,
    rng: &mut R,
) {
    match cfg.update_rule {
        UpdateRule::Asynchronous => {
            for _ in 0..g.node_count() {
                async_step(state, g, race, cfg, rng);
            }
        }
        UpdateRule::Synchronous => {
            sync_generation(state, g, race, cfg, rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{race_payoff_matrix, RaceParameters};
    use crate::networks::test_support::star;
    use crate::networks::{complete, lattice, Neighborhood};
    use crate::seeding::rng_from_seed;

    fn early() -> PayoffMatrix2 {
        race_payoff_matrix(&RaceParameters::default()).unwrap()
    }

    fn accumulated() -> DynamicsConfig {
        DynamicsConfig::default()
    }

    #[test]
    fn init_extremes_and_reproducibility() {
        let g = complete(50).unwrap();
        let mut rng = rng_from_seed(1);
        let all_safe = init_population(&g, &mut rng, 1.0).unwrap();
        assert_eq!(all_safe.unsafe_count(), 0);
        let all_unsafe = init_population(&g, &mut rng, 0.0).unwrap();
        assert_eq!(all_unsafe.unsafe_count(), 50);
        assert!(init_population(&g, &mut rng, 1.5).is_err());
        assert!(init_population(&g, &mut rng, -0.1).is_err());

        let g = crate::networks::dms(1000, 2, 3).unwrap();
        let a = init_population(&g, &mut rng_from_seed(9), 0.5).unwrap();
        let b = init_population(&g, &mut rng_from_seed(9), 0.5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.zealot_count(), 0);
        // 5 sigma of Binomial(1000, 0.5)
        let safe = 1000 - a.unsafe_count();
        assert!((421..=579).contains(&safe), "{safe}");
    }

    #[test]
    fn fitness_examples() {
        let g = complete(3).unwrap();
        let state = PopulationState::from_strategies(
            &g,
            vec![Strategy::Safe, Strategy::Safe, Strategy::Unsafe],
        )
        .unwrap();
        let m = early();
        let f = fitness(&state, &g, &m, 0, &accumulated());
        assert!((f - 52.8).abs() < 1e-12);
        let normalized = DynamicsConfig {
            normalized: true,
            ..accumulated()
        };
        assert!((fitness(&state, &g, &m, 0, &normalized) - 26.4).abs() < 1e-12);
    }

    #[test]
    fn funding_bonus_adds_after_normalization() {
        let g = star(4);
        let mut state = PopulationState::from_strategies(&g, vec![Strategy::Unsafe; 5]).unwrap();
        let m = early();
        let cfg = DynamicsConfig {
            normalized: true,
            ..accumulated()
        };
        let base = fitness(&state, &g, &m, 0, &cfg);
        set_zealots(&mut state, &g, &[0], Strategy::Safe, 1e7).unwrap();
        let f = fitness(&state, &g, &m, 0, &cfg);
        // AS hub against four AU leaves: 1.8 per link, normalized
        assert!((f - (1.8 + 1e7)).abs() < 1e-6);
        assert!(base != f);
    }

    #[test]
    fn fermi_examples() {
        assert_eq!(fermi_probability(3.0, 3.0, 1.0), 0.5);
        assert_eq!(fermi_probability(100.0, -5.0, 0.0), 0.5);
        assert!((fermi_probability(3f64.ln(), 0.0, 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(fermi_probability(0.0, 1e7, 1.0), 1.0);
        assert_eq!(fermi_probability(1e7, 0.0, 1.0), 0.0);
        assert_eq!(fermi_probability(0.0, 1.0, f64::INFINITY), 1.0);
        assert_eq!(fermi_probability(1.0, 1.0, f64::INFINITY), 0.5);
    }

    #[test]
    fn homogeneous_state_is_absorbing() {
        let g = crate::networks::barabasi_albert(200, 2, 1).unwrap();
        let mut state = PopulationState::from_strategies(&g, vec![Strategy::Safe; 200]).unwrap();
        let before = state.clone();
        let mut rng = rng_from_seed(3);
        for _ in 0..5000 {
            assert!(async_step(&mut state, &g, &early(), &accumulated(), &mut rng).is_none());
        }
        assert_eq!(sync_generation(&mut state, &g, &early(), &accumulated(), &mut rng), 0);
        assert_eq!(state, before);
    }

    #[test]
    fn zealot_never_imitates() {
        // node 0 is a safe zealot whose only neighbour is a fitter AU node
        let g = complete(2).unwrap();
        let mut state =
            PopulationState::from_strategies(&g, vec![Strategy::Safe, Strategy::Unsafe]).unwrap();
        set_zealots(&mut state, &g, &[0], Strategy::Safe, 0.0).unwrap();
        let cfg = DynamicsConfig {
            beta: f64::INFINITY,
            ..accumulated()
        };
        let mut rng = rng_from_seed(5);
        for _ in 0..200 {
            async_step(&mut state, &g, &early(), &cfg, &mut rng);
            sync_generation(&mut state, &g, &early(), &cfg, &mut rng);
            assert_eq!(state.strategy(0), Strategy::Safe);
        }
    }

    #[test]
    fn infinite_selection_copies_fitter_neighbour() {
        // AS earns 1.8 against AU, AU earns 75.6 against AS: with beta -> inf
        // the AS node copies on its first turn and the AU node never does.
        let g = complete(2).unwrap();
        let cfg = DynamicsConfig {
            beta: f64::INFINITY,
            ..accumulated()
        };
        for seed in 0..20 {
            let mut state =
                PopulationState::from_strategies(&g, vec![Strategy::Safe, Strategy::Unsafe])
                    .unwrap();
            let mut rng = rng_from_seed(seed);
            let mut probe = rng.clone();
            let focal = probe.gen_range(0..2usize);
            let changed = async_step(&mut state, &g, &early(), &cfg, &mut rng);
            if focal == 0 {
                assert_eq!(changed, Some(0));
                assert_eq!(state.unsafe_count(), 2);
            } else {
                assert_eq!(changed, None);
            }
        }
    }

    #[test]
    fn set_zealots_contract() {
        let g = complete(10).unwrap();
        let mut state = PopulationState::from_strategies(&g, vec![Strategy::Unsafe; 10]).unwrap();
        let before = state.clone();
        set_zealots(&mut state, &g, &[], Strategy::Safe, 0.0).unwrap();
        assert_eq!(state, before);
        set_zealots(&mut state, &g, &[3, 3, 7], Strategy::Safe, 200.0).unwrap();
        assert_eq!(state.zealot_count(), 2);
        assert_eq!(state.unsafe_count(), 8);
        assert_eq!(state.zealot_of(3), Some(Strategy::Safe));
        assert_eq!(state.interference(7), 200.0);
        let again = state.clone();
        set_zealots(&mut state, &g, &[3, 7], Strategy::Safe, 200.0).unwrap();
        assert_eq!(state, again);
        assert!(set_zealots(&mut state, &g, &[10], Strategy::Safe, 0.0).is_err());
    }

    #[test]
    fn sync_generation_is_deterministic() {
        let g = lattice(10, Neighborhood::Edge4).unwrap();
        let start = init_population(&g, &mut rng_from_seed(2), 0.5).unwrap();
        let run = || {
            let mut s = start.clone();
            let mut rng = rng_from_seed(77);
            for _ in 0..20 {
                sync_generation(&mut s, &g, &early(), &accumulated(), &mut rng);
            }
            s
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn neighbor_counts_stay_consistent() {
        let g = crate::networks::dms(300, 2, 8).unwrap();
        let mut state = init_population(&g, &mut rng_from_seed(4), 0.5).unwrap();
        let m = race_payoff_matrix(&RaceParameters {
            p_disaster: 0.7,
            ..RaceParameters::default()
        })
        .unwrap();
        let mut rng = rng_from_seed(6);
        for _ in 0..20 {
            run_generation(&mut state, &g, &m, &accumulated(), &mut rng);
        }
        let fresh = PopulationState::from_strategies(&g, state.strategies().to_vec()).unwrap();
        assert_eq!(state, fresh);
    }
}
