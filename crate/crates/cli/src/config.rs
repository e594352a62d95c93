//! Experiment configuration files (JSON, or TOML by `.toml` extension).
//!
//! ```json
//! {
//!   "game":     { "c": 1, "b": 4, "B": 10000, "W": 100, "s": 1.5, "p_fo": 0.5, "p_r": 0.5 },
//!   "sweep":    { "s": [1, 1.5, 2], "p_r": { "from": 0, "to": 1, "step": 0.05 } },
//!   "network":  { "type": "dms", "nodes": 1000, "m": 2, "instances": 10, "seed": 7 },
//!   "dynamics": { "normalized": false, "update_rule": "async", "beta": 1, "safe_fraction": 0.5 },
//!   "protocol": { "generations": 10000, "window": 1000, "replicates": 25, "master_seed": 1 },
//!   "zealots":  { "fractions": [0, 0.001, 0.01, 0.1], "order": "descending",
//!                 "strategy": "AS", "interference": "none" },
//!   "output":   { "dir": "results", "timeseries": false, "timeseries_stride": 1 }
//! }
//! ```
//!
//! Only `network` and `protocol` are required. Unknown keys are rejected.
//! Sweep axes expand in the fixed order c, b, B, W, s, p_fo, p_r, beta, the
//! first present axis varying slowest. Relative paths are resolved against
//! the directory holding the configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use race_core::dynamics::{DynamicsConfig, Strategy, UpdateRule};
use race_core::experiments::{
    Axis, Interference, ParameterGrid, RunOptions, RunProtocol, ZealotOrder, ZealotSpec,
    DEFAULT_ACCELERATION_SPEED, DEFAULT_FUNDING,
};
use race_core::game::RaceParameters;
use race_core::networks::{
    barabasi_albert, complete, dms, lattice, load_edge_list, Graph, Neighborhood,
};
use race_core::seeding::instance_seed;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub game: GameSection,
    #[serde(default)]
    pub sweep: SweepSection,
    pub network: NetworkSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub zealots: ZealotSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameSection {
    pub c: f64,
    pub b: f64,
    #[serde(rename = "B")]
    pub prize: f64,
    #[serde(rename = "W")]
    pub rounds: f64,
    pub s: f64,
    pub p_fo: f64,
    pub p_r: f64,
}

impl Default for GameSection {
    fn default() -> Self {
        let p = RaceParameters::default();
        GameSection {
            c: p.cost,
            b: p.benefit,
            prize: p.prize,
            rounds: p.rounds,
            s: p.speed,
            p_fo: p.p_found_out,
            p_r: p.p_disaster,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValues {
    List(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl AxisValues {
    pub fn expand(&self, axis: &str) -> Result<Vec<f64>, CliError> {
        match self {
            AxisValues::List(v) => Ok(v.clone()),
            AxisValues::Range(RangeSpec { from, to, step }) => {
                if !(*step > 0.0) || !(to >= from) || !from.is_finite() || !to.is_finite() {
                    return Err(CliError::Config(format!(
                        "sweep.{axis}: range needs from <= to and step > 0"
                    )));
                }
                let n = ((to - from) / step + 1e-9).floor() as usize + 1;
                // Snap to 12 decimals so that 0.05 * 3 reads back as 0.15.
                Ok((0..n)
                    .map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12)
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<AxisValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<AxisValues>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub prize: Option<AxisValues>,
    #[serde(rename = "W", skip_serializing_if = "Option::is_none")]
    pub rounds: Option<AxisValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<AxisValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_fo: Option<AxisValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_r: Option<AxisValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<AxisValues>,
}

impl SweepSection {
    fn entries(&self) -> [(Axis, &Option<AxisValues>); 8] {
        [
            (Axis::Cost, &self.c),
            (Axis::Benefit, &self.b),
            (Axis::Prize, &self.prize),
            (Axis::Rounds, &self.rounds),
            (Axis::Speed, &self.s),
            (Axis::PFoundOut, &self.p_fo),
            (Axis::PDisaster, &self.p_r),
            (Axis::Beta, &self.beta),
        ]
    }

    pub fn grid(&self) -> Result<ParameterGrid, CliError> {
        let mut axes = Vec::new();
        for (axis, values) in self.entries() {
            if let Some(values) = values {
                axes.push((axis, values.expand(axis.name())?));
            }
        }
        Ok(ParameterGrid::new(axes)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkKind {
    Complete,
    Lattice,
    Ba,
    Dms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<NetworkKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    #[serde(default = "default_neighborhood")]
    pub neighborhood: usize,
    #[serde(default = "one")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    /// Pre-generated edge-list files, one per instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub files: Option<Vec<PathBuf>>,
}

fn default_neighborhood() -> usize {
    4
}

fn one() -> usize {
    1
}

impl NetworkSection {
    /// Builds or loads every network instance.
    pub fn instantiate(&self, base_dir: &Path) -> Result<Vec<Graph>, CliError> {
        if let Some(files) = &self.files {
            if files.is_empty() {
                return Err(CliError::Config("network.files is empty".into()));
            }
            return files
                .iter()
                .map(|f| load_edge_list(base_dir.join(f)).map_err(CliError::from))
                .collect();
        }
        let kind = self.kind.ok_or_else(|| {
            CliError::Config("network: either `type` or `files` is required".into())
        })?;
        let need = |value: Option<usize>, key: &str| {
            value.ok_or_else(|| CliError::Config(format!("network.{key} is required for this type")))
        };
        if self.instances == 0 {
            return Err(CliError::Config("network.instances must be at least 1".into()));
        }
        let build = |i: usize| -> Result<Graph, CliError> {
            let seed = instance_seed(self.seed, i);
            Ok(match kind {
                NetworkKind::Complete => complete(need(self.nodes, "nodes")?)?,
                NetworkKind::Lattice => lattice(
                    need(self.side, "side")?,
                    Neighborhood::from_size(self.neighborhood)?,
                )?,
                NetworkKind::Ba => barabasi_albert(need(self.nodes, "nodes")?, need(self.m, "m")?, seed)?,
                NetworkKind::Dms => dms(need(self.nodes, "nodes")?, need(self.m, "m")?, seed)?,
            })
        };
        match kind {
            // deterministic generators: build once, share across instances
            NetworkKind::Complete | NetworkKind::Lattice => {
                let g = build(0)?;
                Ok(vec![g; self.instances])
            }
            NetworkKind::Ba | NetworkKind::Dms => (0..self.instances).map(build).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateRuleName {
    Async,
    Sync,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub normalized: bool,
    pub update_rule: UpdateRuleName,
    pub beta: f64,
    pub safe_fraction: f64,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            normalized: false,
            update_rule: UpdateRuleName::Async,
            beta: 1.0,
            safe_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub generations: usize,
    /// Defaults to the last min(1000, generations) generations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderName {
    Descending,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyName {
    #[serde(rename = "AS")]
    Safe,
    #[serde(rename = "AU")]
    Unsafe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterferenceName {
    None,
    Accelerate,
    Fund,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZealotSection {
    pub fractions: Vec<f64>,
    pub order: OrderName,
    pub strategy: StrategyName,
    pub interference: InterferenceName,
    /// Speed in the acceleration bonus `s * B / W`.
    pub accelerate_speed: f64,
    pub fund_amount: f64,
}

impl Default for ZealotSection {
    fn default() -> Self {
        ZealotSection {
            fractions: vec![0.0],
            order: OrderName::Descending,
            strategy: StrategyName::Safe,
            interference: InterferenceName::None,
            accelerate_speed: DEFAULT_ACCELERATION_SPEED,
            fund_amount: DEFAULT_FUNDING,
        }
    }
}

impl ZealotSection {
    pub fn specs(&self) -> Vec<ZealotSpec> {
        let template = ZealotSpec {
            fraction: 0.0,
            order: match self.order {
                OrderName::Descending => ZealotOrder::Descending,
                OrderName::Reverse => ZealotOrder::Reverse,
            },
            strategy: match self.strategy {
                StrategyName::Safe => Strategy::Safe,
                StrategyName::Unsafe => Strategy::Unsafe,
            },
            interference: match self.interference {
                InterferenceName::None => Interference::None,
                InterferenceName::Accelerate => Interference::Accelerate {
                    speed: self.accelerate_speed,
                },
                InterferenceName::Fund => Interference::Fund {
                    amount: self.fund_amount,
                },
            },
        };
        self.fractions.iter().map(|&f| template.with_fraction(f)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub timeseries: bool,
    pub timeseries_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("results"),
            timeseries: false,
            timeseries_stride: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e == "toml");
        let config: ExperimentConfig = if is_toml {
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn parameters(&self) -> RaceParameters {
        let g = &self.game;
        RaceParameters {
            cost: g.c,
            benefit: g.b,
            prize: g.prize,
            rounds: g.rounds,
            speed: g.s,
            p_found_out: g.p_fo,
            p_disaster: g.p_r,
            beta: self.dynamics.beta,
        }
    }

    pub fn dynamics(&self) -> DynamicsConfig {
        DynamicsConfig {
            normalized: self.dynamics.normalized,
            update_rule: match self.dynamics.update_rule {
                UpdateRuleName::Async => UpdateRule::Asynchronous,
                UpdateRuleName::Sync => UpdateRule::Synchronous,
            },
            beta: self.dynamics.beta,
        }
    }

    pub fn instances(&self) -> usize {
        match &self.network.files {
            Some(files) => files.len(),
            None => self.network.instances,
        }
    }

    pub fn protocol(&self) -> RunProtocol {
        let p = &self.protocol;
        RunProtocol {
            generations: p.generations,
            averaging_window: p.window.unwrap_or(p.generations.min(1000)),
            replicates: p.replicates,
            network_instances: self.instances(),
            master_seed: p.master_seed,
        }
    }

    pub fn options(&self) -> RunOptions {
        RunOptions {
            safe_fraction: self.dynamics.safe_fraction,
            timeseries_stride: self.output.timeseries.then_some(self.output.timeseries_stride),
        }
    }

    /// Checks every section before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.parameters().validate()?;
        self.dynamics().validate()?;
        self.protocol().validate()?;
        let grid = self.sweep.grid()?;
        for cell in grid.cells(&self.parameters()) {
            cell.validate()?;
        }
        if !(0.0..=1.0).contains(&self.dynamics.safe_fraction) {
            return Err(CliError::Config(format!(
                "dynamics.safe_fraction must lie in [0, 1], got {}",
                self.dynamics.safe_fraction
            )));
        }
        let z = &self.zealots;
        if z.fractions.is_empty() {
            return Err(CliError::Config("zealots.fractions is empty".into()));
        }
        if let Some(f) = z.fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(CliError::Config(format!(
                "zealots.fractions must lie in [0, 1], got {f}"
            )));
        }
        if !z.accelerate_speed.is_finite() || !z.fund_amount.is_finite() {
            return Err(CliError::Config("zealots bonuses must be finite".into()));
        }
        if self.output.timeseries_stride == 0 {
            return Err(CliError::Config("output.timeseries_stride must be at least 1".into()));
        }
        if self.network.files.is_none() && self.network.kind.is_none() {
            return Err(CliError::Config(
                "network: either `type` or `files` is required".into(),
            ));
        }
        Ok(())
    }
}
