//! Replicate orchestration: single runs, parameter sweeps, zealot
//! progressions, degree-class time series and aggregation.
//!
//! Every replicate draws from its own generator seeded by
//! [`replicate_seed`](crate::seeding::replicate_seed)`(master, cell,
//! instance, replicate)`. The zealot fraction is not part of the seed, so the
//! points of a progression share random numbers. Tasks run in parallel on the
//! current rayon pool and come back in `(cell, fraction, instance,
//! replicate)` order, independent of the number of threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dynamics::{init_population, run_generation, set_zealots, DynamicsConfig, Strategy};
use crate::error::{Error, Result};
use crate::game::{race_payoff_matrix, RaceParameters};
use crate::networks::{degree_classes, rank_by_degree, DegreeClass, Graph, NodeId, Provenance};
use crate::seeding::{replicate_seed, rng_from_seed};

/// Share of the degree ranking from which reverse-order zealots are taken.
pub const REVERSE_SLICE_FRACTION: f64 = 0.1;
/// Speed used for the acceleration bonus `s * B / W`.
pub const DEFAULT_ACCELERATION_SPEED: f64 = 2.0;
/// Funding bonus large enough that neighbours always imitate.
pub const DEFAULT_FUNDING: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunProtocol {
    pub generations: usize,
    /// Trailing generations averaged into the equilibrium frequencies.
    pub averaging_window: usize,
    pub replicates: usize,
    pub network_instances: usize,
    pub master_seed: u64,
}

impl RunProtocol {
    /// Well-mixed and lattice runs: 10^3 generations, all of them averaged.
    pub fn homogeneous() -> Self {
        RunProtocol {
            generations: 1000,
            averaging_window: 1000,
            replicates: 25,
            network_instances: 10,
            master_seed: 0,
        }
    }

    /// Scale-free runs: 10^4 generations, the last 10^3 averaged.
    pub fn scale_free() -> Self {
        RunProtocol {
            generations: 10_000,
            ..Self::homogeneous()
        }
    }

    /// Halved run length for quick checks.
    pub fn desk(self) -> Self {
        RunProtocol {
            generations: (self.generations / 2).max(1),
            averaging_window: (self.averaging_window / 2).max(1),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("generations", self.generations),
            ("window", self.averaging_window),
            ("replicates", self.replicates),
            ("instances", self.network_instances),
        ] {
            if value == 0 {
                return Err(Error::invalid(field, "must be at least 1"));
            }
        }
        if self.averaging_window > self.generations {
            return Err(Error::invalid(
                "window",
                format!(
                    "averaging window {} exceeds {} generations",
                    self.averaging_window, self.generations
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZealotOrder {
    /// Highest degree first.
    Descending,
    /// From the bottom of the top-10% degree slice upwards.
    Reverse,
}

impl ZealotOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            ZealotOrder::Descending => "descending",
            ZealotOrder::Reverse => "reverse",
        }
    }
}

impl fmt::Display for ZealotOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ZealotOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "descending" => Ok(ZealotOrder::Descending),
            "reverse" => Ok(ZealotOrder::Reverse),
            other => Err(Error::invalid(
                "order",
                format!("expected descending or reverse, got `{other}`"),
            )),
        }
    }
}

/// Exogenous payoff given to zealots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interference {
    None,
    /// Adds `speed * B / W`.
    Accelerate { speed: f64 },
    /// Adds a fixed amount.
    Fund { amount: f64 },
}

impl Interference {
    pub fn bonus(&self, params: &RaceParameters) -> f64 {
        match *self {
            Interference::None => 0.0,
            Interference::Accelerate { speed } => speed * params.prize / params.rounds,
            Interference::Fund { amount } => amount,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Interference::None => "none",
            Interference::Accelerate { .. } => "accelerate",
            Interference::Fund { .. } => "fund",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZealotSpec {
    /// Share of the population converted, rounded to the nearest node count.
    pub fraction: f64,
    pub order: ZealotOrder,
    pub strategy: Strategy,
    pub interference: Interference,
}

impl ZealotSpec {
    pub fn none() -> Self {
        ZealotSpec {
            fraction: 0.0,
            order: ZealotOrder::Descending,
            strategy: Strategy::Safe,
            interference: Interference::None,
        }
    }

    pub fn with_fraction(self, fraction: f64) -> Self {
        ZealotSpec { fraction, ..self }
    }

    pub fn count(&self, nodes: usize) -> usize {
        (self.fraction * nodes as f64).round() as usize
    }

    /// The nodes this spec converts on `g`.
    pub fn resolve(&self, g: &Graph) -> Result<Vec<NodeId>> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::invalid(
                "fractions",
                format!("zealot fraction must lie in [0, 1], got {}", self.fraction),
            ));
        }
        let n = g.node_count();
        let count = self.count(n);
        if count == 0 {
            return Ok(Vec::new());
        }
        let ranking = rank_by_degree(g);
        match self.order {
            ZealotOrder::Descending => Ok(ranking[..count].to_vec()),
            ZealotOrder::Reverse => {
                let slice = (REVERSE_SLICE_FRACTION * n as f64).round() as usize;
                if count > slice {
                    return Err(Error::invalid(
                        "fractions",
                        format!(
                            "reverse order converts at most the top {slice} nodes, asked for {count}"
                        ),
                    ));
                }
                Ok(ranking[slice - count..slice].to_vec())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Probability that a node starts as AS.
    pub safe_fraction: f64,
    /// Record class frequencies every this many generations.
    pub timeseries_stride: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            safe_fraction: 0.5,
            timeseries_stride: None,
        }
    }
}

/// AU frequency per degree class; `None` where the class has no members.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassFrequencies(pub [Option<f64>; 3]);

impl ClassFrequencies {
    pub fn get(&self, class: DegreeClass) -> Option<f64> {
        self.0[class.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    pub generation: usize,
    pub au_all: f64,
    pub au_by_class: ClassFrequencies,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateResult {
    pub seed: u64,
    pub nodes: usize,
    pub zealot_count: usize,
    pub zealot_strategy: Strategy,
    /// Window mean over every node, zealots included.
    pub au_freq_all: f64,
    /// Window mean over non-zealots; `None` when every node is a zealot.
    pub au_freq_nonzealot: Option<f64>,
    pub au_by_class: ClassFrequencies,
    /// Raw window sums behind the frequencies, in node-generations.
    pub au_sum_all: u64,
    pub au_sum_nonzealot: u64,
    pub window: usize,
    pub timeseries: Option<Vec<TimeSeriesRow>>,
}

struct ClassCounter {
    classes: Vec<DegreeClass>,
    sizes: [usize; 3],
}

impl ClassCounter {
    fn new(g: &Graph) -> Self {
        let classes = degree_classes(g, g.nominal_connectivity());
        let mut sizes = [0; 3];
        for c in &classes {
            sizes[c.index()] += 1;
        }
        ClassCounter { classes, sizes }
    }

    fn unsafe_counts(&self, strategies: &[Strategy]) -> [usize; 3] {
        let mut counts = [0; 3];
        for (c, s) in self.classes.iter().zip(strategies) {
            if *s == Strategy::Unsafe {
                counts[c.index()] += 1;
            }
        }
        counts
    }

    fn frequencies(&self, counts: [u64; 3], samples: usize) -> ClassFrequencies {
        let mut out = [None; 3];
        for i in 0..3 {
            if self.sizes[i] > 0 {
                out[i] = Some(counts[i] as f64 / (self.sizes[i] * samples) as f64);
            }
        }
        ClassFrequencies(out)
    }
}

/// Runs one replicate: random initial strategies, zealots, then
/// `protocol.generations` generations; frequencies are averaged over the
/// trailing `protocol.averaging_window` generations.
pub fn run_replicate(
    g: &Graph,
    params: &RaceParameters,
    cfg: &DynamicsConfig,
    protocol: &RunProtocol,
    zealots: &ZealotSpec,
    options: &RunOptions,
    seed: u64,
) -> Result<ReplicateResult> {
    protocol.validate()?;
    cfg.validate()?;
    if options.timeseries_stride == Some(0) {
        return Err(Error::invalid("timeseries_stride", "must be at least 1"));
    }
    let race = race_payoff_matrix(params)?;
    let zealot_nodes = zealots.resolve(g)?;
    let mut rng = rng_from_seed(seed);
    let mut state = init_population(g, &mut rng, options.safe_fraction)?;
    set_zealots(
        &mut state,
        g,
        &zealot_nodes,
        zealots.strategy,
        zealots.interference.bonus(params),
    )?;

    let n = g.node_count();
    let zealot_count = state.zealot_count();
    let zealot_unsafe = if zealots.strategy == Strategy::Unsafe {
        zealot_count
    } else {
        0
    };
    let classes = ClassCounter::new(g);
    let mut series = options.timeseries_stride.map(|_| Vec::new());
    let snapshot = |generation: usize, state: &crate::dynamics::PopulationState| {
        let counts = classes.unsafe_counts(state.strategies());
        TimeSeriesRow {
            generation,
            au_all: state.unsafe_fraction(),
            au_by_class: classes.frequencies(counts.map(|c| c as u64), 1),
        }
    };
    if let Some(rows) = series.as_mut() {
        rows.push(snapshot(0, &state));
    }

    let first_measured = protocol.generations - protocol.averaging_window + 1;
    let mut sum_all = 0u64;
    let mut sum_class = [0u64; 3];
    for generation in 1..=protocol.generations {
        run_generation(&mut state, g, &race, cfg, &mut rng);
        if generation >= first_measured {
            sum_all += state.unsafe_count() as u64;
            let counts = classes.unsafe_counts(state.strategies());
            for i in 0..3 {
                sum_class[i] += counts[i] as u64;
            }
        }
        if let (Some(rows), Some(stride)) = (series.as_mut(), options.timeseries_stride) {
            if generation % stride == 0 {
                rows.push(snapshot(generation, &state));
            }
        }
    }

    let window = protocol.averaging_window;
    let sum_nonzealot = sum_all - (zealot_unsafe * window) as u64;
    let free = n - zealot_count;
    Ok(ReplicateResult {
        seed,
        nodes: n,
        zealot_count,
        zealot_strategy: zealots.strategy,
        au_freq_all: sum_all as f64 / (n * window) as f64,
        au_freq_nonzealot: (free > 0).then(|| sum_nonzealot as f64 / (free * window) as f64),
        au_by_class: classes.frequencies(sum_class, window),
        au_sum_all: sum_all,
        au_sum_nonzealot: sum_nonzealot,
        window,
        timeseries: series,
    })
}

/// Per-generation AU frequencies by degree class for one run, generation 0
/// being the initial configuration.
pub fn degree_class_timeseries(
    g: &Graph,
    params: &RaceParameters,
    cfg: &DynamicsConfig,
    protocol: &RunProtocol,
    zealots: &ZealotSpec,
    options: &RunOptions,
    seed: u64,
) -> Result<Vec<TimeSeriesRow>> {
    let options = RunOptions {
        timeseries_stride: Some(options.timeseries_stride.unwrap_or(1)),
        ..*options
    };
    let result = run_replicate(g, params, cfg, protocol, zealots, &options, seed)?;
    Ok(result.timeseries.unwrap_or_default())
}

/// Parameter that a sweep axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Cost,
    Benefit,
    Prize,
    Rounds,
    Speed,
    PFoundOut,
    PDisaster,
    Beta,
}

impl Axis {
    pub const ALL: [Axis; 8] = [
        Axis::Cost,
        Axis::Benefit,
        Axis::Prize,
        Axis::Rounds,
        Axis::Speed,
        Axis::PFoundOut,
        Axis::PDisaster,
        Axis::Beta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Cost => "c",
            Axis::Benefit => "b",
            Axis::Prize => "B",
            Axis::Rounds => "W",
            Axis::Speed => "s",
            Axis::PFoundOut => "p_fo",
            Axis::PDisaster => "p_r",
            Axis::Beta => "beta",
        }
    }

    fn apply(self, p: &mut RaceParameters, value: f64) {
        let slot = match self {
            Axis::Cost => &mut p.cost,
            Axis::Benefit => &mut p.benefit,
            Axis::Prize => &mut p.prize,
            Axis::Rounds => &mut p.rounds,
            Axis::Speed => &mut p.speed,
            Axis::PFoundOut => &mut p.p_found_out,
            Axis::PDisaster => &mut p.p_disaster,
            Axis::Beta => &mut p.beta,
        };
        *slot = value;
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid("sweep", format!("unknown axis `{s}`")))
    }
}

/// Cartesian grid over parameter axes; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterGrid {
    axes: Vec<(Axis, Vec<f64>)>,
}

impl ParameterGrid {
    pub fn new(axes: Vec<(Axis, Vec<f64>)>) -> Result<Self> {
        for (i, (axis, values)) in axes.iter().enumerate() {
            if values.is_empty() {
                return Err(Error::invalid("sweep", format!("axis `{}` is empty", axis.name())));
            }
            if axes[..i].iter().any(|(a, _)| a == axis) {
                return Err(Error::invalid(
                    "sweep",
                    format!("axis `{}` given twice", axis.name()),
                ));
            }
        }
        Ok(ParameterGrid { axes })
    }

    /// A grid with one cell: the base parameters.
    pub fn single() -> Self {
        ParameterGrid::default()
    }

    pub fn axes(&self) -> &[(Axis, Vec<f64>)] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self, base: &RaceParameters) -> Vec<RaceParameters> {
        let mut cells = Vec::with_capacity(self.len());
        for index in 0..self.len() {
            let mut p = *base;
            let mut rest = index;
            for (axis, values) in self.axes.iter().rev() {
                axis.apply(&mut p, values[rest % values.len()]);
                rest /= values.len();
            }
            cells.push(p);
        }
        cells
    }
}

/// Everything a sweep needs. `networks` holds the pre-generated instances,
/// one per `protocol.network_instances`; `zealots` holds one spec per
/// zealot fraction.
#[derive(Debug, Clone)]
pub struct SweepPlan<'a> {
    pub base: RaceParameters,
    pub grid: ParameterGrid,
    pub dynamics: DynamicsConfig,
    pub protocol: RunProtocol,
    pub zealots: Vec<ZealotSpec>,
    pub options: RunOptions,
    pub networks: &'a [Graph],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub cell: usize,
    pub fraction_index: usize,
    pub params: RaceParameters,
    pub dynamics: DynamicsConfig,
    pub zealots: ZealotSpec,
    pub network: Provenance,
    pub instance: usize,
    pub replicate: usize,
    pub generations: usize,
    pub result: ReplicateResult,
}

impl SweepRecord {
    fn sort_key(&self) -> (usize, usize, usize, usize) {
        (self.cell, self.fraction_index, self.instance, self.replicate)
    }
}

pub fn sweep(plan: &SweepPlan<'_>) -> Result<Vec<SweepRecord>> {
    plan.protocol.validate()?;
    plan.dynamics.validate()?;
    if plan.networks.len() != plan.protocol.network_instances {
        return Err(Error::invalid(
            "instances",
            format!(
                "protocol asks for {} network instances, {} supplied",
                plan.protocol.network_instances,
                plan.networks.len()
            ),
        ));
    }
    if plan.zealots.is_empty() {
        return Err(Error::invalid("fractions", "at least one zealot fraction is required"));
    }
    let beta_swept = plan.grid.axes().iter().any(|(a, _)| *a == Axis::Beta);
    let base = RaceParameters {
        beta: plan.dynamics.beta,
        ..plan.base
    };
    let cells = plan.grid.cells(&base);
    for p in &cells {
        p.validate()?;
    }
    for spec in &plan.zealots {
        for g in plan.networks {
            spec.resolve(g)?;
        }
    }

    let mut tasks = Vec::new();
    for cell in 0..cells.len() {
        for fraction_index in 0..plan.zealots.len() {
            for instance in 0..plan.protocol.network_instances {
                for replicate in 0..plan.protocol.replicates {
                    tasks.push((cell, fraction_index, instance, replicate));
                }
            }
        }
    }

    tasks
        .into_par_iter()
        .map(|(cell, fraction_index, instance, replicate)| {
            let params = cells[cell];
            let dynamics = if beta_swept {
                DynamicsConfig {
                    beta: params.beta,
                    ..plan.dynamics
                }
            } else {
                plan.dynamics
            };
            let zealots = plan.zealots[fraction_index];
            let graph = &plan.networks[instance];
            let seed = replicate_seed(plan.protocol.master_seed, cell, instance, replicate);
            let result = run_replicate(
                graph,
                &params,
                &dynamics,
                &plan.protocol,
                &zealots,
                &plan.options,
                seed,
            )?;
            Ok(SweepRecord {
                cell,
                fraction_index,
                params,
                dynamics,
                zealots,
                network: *graph.provenance(),
                instance,
                replicate,
                generations: plan.protocol.generations,
                result,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStderr {
    pub mean: f64,
    /// Sample standard deviation over sqrt(n); 0 for a single value.
    pub stderr: f64,
    pub n: usize,
}

impl MeanStderr {
    pub fn of(values: &[f64]) -> Option<MeanStderr> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(MeanStderr { mean, stderr, n })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: usize,
    pub fraction_index: usize,
    pub params: RaceParameters,
    pub zealots: ZealotSpec,
    pub au_all: MeanStderr,
    pub au_nonzealot: Option<MeanStderr>,
    pub au_by_class: [Option<MeanStderr>; 3],
}

/// Mean and standard error per grid cell and zealot fraction over all
/// instances and replicates. Input order does not matter.
pub fn aggregate(records: &[SweepRecord]) -> Vec<CellSummary> {
    let mut sorted: Vec<&SweepRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.sort_key());
    let mut out = Vec::new();
    for group in sorted.chunk_by(|a, b| (a.cell, a.fraction_index) == (b.cell, b.fraction_index)) {
        let all: Vec<f64> = group.iter().map(|r| r.result.au_freq_all).collect();
        let nonzealot: Vec<f64> = group
            .iter()
            .filter_map(|r| r.result.au_freq_nonzealot)
            .collect();
        let by_class = DegreeClass::ALL.map(|class| {
            let values: Vec<f64> = group
                .iter()
                .filter_map(|r| r.result.au_by_class.get(class))
                .collect();
            MeanStderr::of(&values)
        });
        out.push(CellSummary {
            cell: group[0].cell,
            fraction_index: group[0].fraction_index,
            params: group[0].params,
            zealots: group[0].zealots,
            au_all: MeanStderr::of(&all).expect("groups are nonempty"),
            au_nonzealot: MeanStderr::of(&nonzealot),
            au_by_class: by_class,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgressionPoint {
    pub fraction: f64,
    pub zealot_nodes: Vec<NodeId>,
    pub summary: CellSummary,
    pub records: Vec<SweepRecord>,
}

/// Converts growing prefixes of the degree ranking to zealots and records
/// the replicate-averaged outcome for each fraction. `fractions` must be
/// ascending, so every zealot set contains the previous one.
#[allow(clippy::too_many_arguments)]
pub fn zealot_progression(
    g: &Graph,
    params: &RaceParameters,
    cfg: &DynamicsConfig,
    protocol: &RunProtocol,
    fractions: &[f64],
    template: &ZealotSpec,
    options: &RunOptions,
) -> Result<Vec<ProgressionPoint>> {
    if fractions.is_empty() {
        return Err(Error::invalid("fractions", "no zealot fractions given"));
    }
    if fractions.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("fractions", "zealot fractions must be sorted ascending"));
    }
    let zealots: Vec<ZealotSpec> = fractions.iter().map(|&f| template.with_fraction(f)).collect();
    let plan = SweepPlan {
        base: *params,
        grid: ParameterGrid::single(),
        dynamics: *cfg,
        protocol: RunProtocol {
            network_instances: 1,
            ..*protocol
        },
        zealots: zealots.clone(),
        options: *options,
        networks: std::slice::from_ref(g),
    };
    let records = sweep(&plan)?;
    let summaries = aggregate(&records);
    summaries
        .into_iter()
        .map(|summary| {
            let spec = zealots[summary.fraction_index];
            Ok(ProgressionPoint {
                fraction: spec.fraction,
                zealot_nodes: spec.resolve(g)?,
                records: records
                    .iter()
                    .filter(|r| r.fraction_index == summary.fraction_index)
                    .cloned()
                    .collect(),
                summary,
            })
        })
        .collect()
}
