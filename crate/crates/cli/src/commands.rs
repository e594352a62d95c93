use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use race_core::experiments::{aggregate, sweep, SweepPlan};
use race_core::game::{
    classify_region, early_region_boundaries, late_risk_dominance_boundary,
    late_welfare_boundary, RaceParameters, Regime,
};
use race_core::networks::{barabasi_albert, complete, dms, lattice, save_edge_list, Neighborhood};
use race_core::seeding::instance_seed;

use crate::config::ExperimentConfig;
use crate::csv::{regions_csv, summary_csv, sweep_csv, timeseries_csv, RegionRow};
use crate::error::CliError;

/// Version of the output layout recorded in every manifest.
pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(name = "race-sim", version, about = "AI race game simulator on networks")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "RACE_SIM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write edge-list files for one or more network instances.
    GenerateNetwork(GenerateArgs),
    /// Simulate a single parameter cell.
    Run(ExperimentArgs),
    /// Simulate every cell of the configured parameter grid.
    Sweep(ExperimentArgs),
    /// Simulate an ascending progression of zealot fractions.
    Zealots(ExperimentArgs),
    /// Tabulate analytical region boundaries.
    Regions(RegionArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetworkType {
    Complete,
    Lattice,
    Ba,
    Dms,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long = "type", value_enum)]
    pub kind: NetworkType,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub neighborhood: usize,
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Configuration file (.json or .toml).
    pub config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub regime: String,
    #[arg(long, value_delimiter = ',', default_value = "1.5")]
    pub s: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub pfo: Vec<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Explicit p_r values; rows then carry region labels.
    #[arg(long, value_delimiter = ',', conflicts_with = "pr_step")]
    pub pr: Vec<f64>,
    /// Scan p_r over [0, 1] with this step.
    #[arg(long)]
    pub pr_step: Option<f64>,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Run,
    Sweep,
    Zealots,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Run => "run",
            Mode::Sweep => "sweep",
            Mode::Zealots => "zealots",
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    pool.install(|| match cli.command {
        Command::GenerateNetwork(args) => generate_network(&args),
        Command::Run(args) => experiment(&args, Mode::Run),
        Command::Sweep(args) => experiment(&args, Mode::Sweep),
        Command::Zealots(args) => experiment(&args, Mode::Zealots),
        Command::Regions(args) => regions(&args),
    })
}

fn flag_error(flag: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("--{flag}: {err}"))
}

fn required(value: Option<usize>, flag: &str) -> Result<usize, CliError> {
    value.ok_or_else(|| flag_error(flag, "required for this network type"))
}

/// Core validation errors name the parameter, not the flag; map them back.
fn core_flag_error(err: race_core::Error) -> CliError {
    match err {
        race_core::Error::InvalidParameter { field, reason } => {
            let flag = match field {
                "p_fo" => "pfo",
                "p_r" => "pr",
                other => other,
            };
            flag_error(flag, reason)
        }
        other => other.into(),
    }
}

pub fn generate_network(args: &GenerateArgs) -> Result<(), CliError> {
    if args.instances == 0 {
        return Err(flag_error("instances", "must be at least 1"));
    }
    let graphs = match args.kind {
        NetworkType::Complete => vec![complete(required(args.nodes, "nodes")?).map_err(core_flag_error)?],
        NetworkType::Lattice => {
            let nbhd = Neighborhood::from_size(args.neighborhood).map_err(core_flag_error)?;
            vec![lattice(required(args.side, "side")?, nbhd).map_err(core_flag_error)?]
        }
        NetworkType::Ba | NetworkType::Dms => {
            let nodes = required(args.nodes, "nodes")?;
            let m = required(args.m, "m")?;
            (0..args.instances)
                .map(|i| {
                    let seed = instance_seed(args.seed, i);
                    match args.kind {
                        NetworkType::Ba => barabasi_albert(nodes, m, seed),
                        _ => dms(nodes, m, seed),
                    }
                    .map_err(core_flag_error)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(&args.out_dir, e))?;
    for g in &graphs {
        let p = g.provenance();
        let path = args.out_dir.join(format!("net_{}_{}.edges", p.generator, p.seed));
        save_edge_list(g, &path)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    format_version: &'static str,
    command: &'static str,
    simulator_version: &'static str,
    config: &'a ExperimentConfig,
}

fn experiment(args: &ExperimentArgs, mode: Mode) -> Result<(), CliError> {
    let config = ExperimentConfig::load(&args.config)?;
    let base_dir = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let out_dir = match &args.out {
        Some(dir) => dir.clone(),
        None => base_dir.join(&config.output.dir),
    };

    let grid = config.sweep.grid()?;
    let zealots = config.zealots.specs();
    match mode {
        Mode::Run if grid.len() != 1 || zealots.len() != 1 => {
            return Err(CliError::Config(format!(
                "run expects a single parameter cell and zealot fraction, got {} cells x {} fractions; use `sweep`",
                grid.len(),
                zealots.len()
            )))
        }
        Mode::Zealots if zealots.windows(2).any(|w| w[0].fraction > w[1].fraction) => {
            return Err(CliError::Config(
                "zealots.fractions must be sorted ascending".into(),
            ))
        }
        _ => {}
    }

    let networks = config.network.instantiate(&base_dir)?;
    let plan = SweepPlan {
        base: config.parameters(),
        grid,
        dynamics: config.dynamics(),
        protocol: config.protocol(),
        zealots,
        options: config.options(),
        networks: &networks,
    };
    let tasks = plan.grid.len()
        * plan.zealots.len()
        * plan.protocol.network_instances
        * plan.protocol.replicates;
    eprintln!(
        "{}: {} cells x {} fractions x {} instances x {} replicates = {tasks} runs on {} threads",
        mode.name(),
        plan.grid.len(),
        plan.zealots.len(),
        plan.protocol.network_instances,
        plan.protocol.replicates,
        rayon::current_num_threads(),
    );
    let started = Instant::now();
    let records = sweep(&plan)?;
    eprintln!("finished in {:.1} s", started.elapsed().as_secs_f64());

    let mut resolved = config.clone();
    resolved.protocol.window = Some(plan.protocol.averaging_window);
    resolved.output.dir = out_dir.clone();
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        command: mode.name(),
        simulator_version: env!("CARGO_PKG_VERSION"),
        config: &resolved,
    };
    let mut files = vec![
        ("sweep.csv", sweep_csv(&records)),
        (
            "manifest.json",
            serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
        ),
    ];
    // The first run stands in as the typical trajectory.
    if let Some(rows) = records.first().and_then(|r| r.result.timeseries.as_ref()) {
        files.push(("timeseries.csv", timeseries_csv(rows)));
    }
    write_all_or_nothing(&out_dir, &files)?;

    let summary = summary_csv(&aggregate(&records));
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(summary.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(())
}

/// Writes every file or, on the first failure, removes those already written.
fn write_all_or_nothing(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written: Vec<PathBuf> = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(CliError::io(path, e));
        }
        written.push(path);
    }
    Ok(())
}

pub fn region_rows(args: &RegionArgs) -> Result<Vec<RegionRow>, CliError> {
    let regime: Regime = args.regime.parse().map_err(core_flag_error)?;
    let pr_values: Vec<Option<f64>> = match args.pr_step {
        Some(step) => {
            if !(step > 0.0 && step <= 1.0) {
                return Err(flag_error("pr-step", "must lie in (0, 1]"));
            }
            let n = (1.0 / step + 1e-9).floor() as usize;
            (0..=n)
                .map(|i| Some(((i as f64 * step) * 1e12).round() / 1e12))
                .collect()
        }
        None if args.pr.is_empty() => vec![None],
        None => args.pr.iter().copied().map(Some).collect(),
    };

    let mut rows = Vec::new();
    for &s in &args.s {
        for &pfo in &args.pfo {
            for &pr in &pr_values {
                let params = RaceParameters {
                    cost: args.c,
                    benefit: args.b,
                    speed: s,
                    p_found_out: pfo,
                    p_disaster: pr.unwrap_or(0.5),
                    ..RaceParameters::default()
                };
                let params = match regime {
                    Regime::Early => params,
                    Regime::Late => params.late_limit(),
                };
                params.validate().map_err(core_flag_error)?;
                let (early_lo, early_hi) = early_region_boundaries(s)?;
                let region = match pr {
                    // p_fo = 1 leaves late regions undefined: empty label
                    Some(_) => classify_region(&params, regime).ok().map(|r| r.to_string()),
                    None => None,
                };
                rows.push(RegionRow {
                    regime: regime.to_string(),
                    speed: s,
                    p_found_out: pfo,
                    benefit: args.b,
                    cost: args.c,
                    p_disaster: pr,
                    early_lo,
                    early_hi,
                    late_welfare: late_welfare_boundary(&params).ok(),
                    late_risk_dominance: late_risk_dominance_boundary(&params)?,
                    region,
                });
            }
        }
    }
    Ok(rows)
}

fn regions(args: &RegionArgs) -> Result<(), CliError> {
    let table = regions_csv(&region_rows(args)?);
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &table) {
                let _ = fs::remove_file(path);
                return Err(CliError::io(path, e));
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(table.as_bytes())
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region_args(argv: &[&str]) -> RegionArgs {
        let mut full = vec!["race-sim", "regions"];
        full.extend_from_slice(argv);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Regions(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn early_boundaries_row() {
        let rows = region_rows(&region_args(&["--regime", "early", "--s", "1.5"])).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].early_lo - 1.0 / 3.0).abs() < 1e-12);
        assert!((rows[0].early_hi - 7.0 / 9.0).abs() < 1e-12);
        assert_eq!(rows[0].region, None);
    }

    #[test]
    fn late_boundaries_rows() {
        let rows =
            region_rows(&region_args(&["--regime", "late", "--pfo", "0.6", "--b", "4", "--c", "1"]))
                .unwrap();
        assert!((rows[0].late_welfare.unwrap() - 0.21875).abs() < 1e-12);
        let rows = region_rows(&region_args(&["--regime", "late", "--s", "1.5"])).unwrap();
        assert!((rows[0].late_risk_dominance - 7.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn scan_labels_every_row() {
        let rows = region_rows(&region_args(&[
            "--regime", "early", "--s", "1.5,2", "--pr-step", "0.05",
        ]))
        .unwrap();
        assert_eq!(rows.len(), 42);
        assert_eq!(rows[10].p_disaster, Some(0.5));
        assert_eq!(rows[10].region.as_deref(), Some("II"));
        assert_eq!(rows[2].region.as_deref(), Some("III"));
        assert_eq!(rows[20].region.as_deref(), Some("I"));
    }

    #[test]
    fn invalid_regime_names_the_flag() {
        let err = region_rows(&region_args(&["--regime", "middle"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--regime"), "{err}");
        let err = region_rows(&region_args(&["--regime", "early", "--s", "0.5"])).unwrap_err();
        assert!(err.to_string().contains("--s"), "{err}");
    }

    #[test]
    fn generator_flags_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        let args = GenerateArgs {
            kind: NetworkType::Ba,
            nodes: Some(3),
            m: Some(2),
            side: None,
            neighborhood: 4,
            instances: 1,
            seed: 0,
            out_dir: dir.path().to_path_buf(),
        };
        let err = generate_network(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--nodes"), "{err}");
        let err = generate_network(&GenerateArgs { m: None, nodes: Some(10), ..args }).unwrap_err();
        assert!(err.to_string().contains("--m"), "{err}");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
