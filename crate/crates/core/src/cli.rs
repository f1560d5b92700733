//! Command-line driver.
//!
//! Every command writes its CSV next to a `.manifest.json` holding the
//! resolved parameters. Flags override values from `--config`, a JSON object
//! keyed by flag name. The output directory defaults to `$WALKMIX_OUT_DIR`,
//! then to the working directory.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical or fit failure, 4 I/O
//! failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{quench_average, EnvTemplate, ObservableSeries, QuenchTemplate, SeriesMetadata};
use crate::classical_baseline::classical_distance_series;
use crate::core_sim::{evolve, hadamard, plus_i_coin, Environment, Gate2};
use crate::env_gen::{GateAngles, DEFAULT_SPREAD};
use crate::error::{Error, Result};
use crate::experiments::{mixing_sweep, saturation_sweep, GridPoint, MixingSweep, SaturationSweep};
use crate::io::{format_f64, read_json, write_json, write_series_csv, write_snapshot, EnvironmentFile, MatrixJson, RunManifest};
use crate::observables::position_diagnostics;

pub const OUT_DIR_ENV: &str = "WALKMIX_OUT_DIR";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

const DEFAULT_SAMPLES: usize = 30;

#[derive(Debug, Parser)]
#[command(name = "walkmix", version, about = "Quantum walks on a ring coupled to a finite environment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one walk, or a quench average over sampled environments.
    Simulate(SimulateArgs),
    /// Mixing time as a function of the environment dimension.
    MixingSweep(MixingArgs),
    /// Long-time distance to the mixed state over a (d_S, d_B) grid.
    SaturationSweep(SaturationArgs),
    /// Classical random walk on the same ring.
    Classical(ClassicalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Nonlocal,
    Local,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    /// Odd number of ring sites.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    /// Environment dimension of the nonlocal model.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Half-width of the box the Hamiltonian entries are drawn from.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    /// `hadamard`, or a 2×2 matrix as JSON (inline or a file path).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coin: Option<String>,
    /// `plus-i`, or `[[re, im], [re, im]]` as JSON (inline or a file path).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_coin: Option<String>,
    /// Starting site; defaults to the middle of the ring.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_site: Option<usize>,
    /// Quench samples (30 for the nonlocal model, 1 for the local one).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Use E0 and E1 from this file instead of sampling them.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_file: Option<PathBuf>,
    /// Write the environment of sample 0 to this file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub export_env: Option<PathBuf>,
    /// Write the final state (binary snapshot); needs a single sample.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MixingArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_dims: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SaturationArgs {
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites_list: Option<Vec<usize>>,
    /// Environment dimensions, used for every lattice size.
    #[arg(long, value_delimiter = ',', conflicts_with = "ratios")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_dims: Option<Vec<usize>>,
    /// Target `d_B/d_S`; `d_E` is rounded to the nearest integer.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// One step count for all sizes, or one per entry of `--sites-list`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClassicalArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Starting site; defaults to the middle of the ring.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct OutputArgs {
    /// JSON file with default values for any of the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// CSV path; defaults to `<out-dir>/<command>.csv`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(outputs) => {
            for p in outputs {
                eprintln!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Dimension(_) | Error::Domain(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        Error::Json(j) if j.is_io() => EXIT_IO,
        Error::Json(_) => EXIT_USAGE,
        Error::Sample { source, .. } => exit_code(source),
        Error::Numerical(_)
        | Error::InvalidDensity { .. }
        | Error::FitWindow(_)
        | Error::NoDecay { .. }
        | Error::Size { .. }
        | Error::Observer { .. } => EXIT_NUMERICAL,
    }
}

/// Runs a parsed command; returns the files written.
pub fn execute(command: &Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Simulate(a) => cmd_simulate(&resolve(a, &a.out)?),
        Command::MixingSweep(a) => cmd_mixing_sweep(&resolve(a, &a.out)?),
        Command::SaturationSweep(a) => cmd_saturation_sweep(&resolve(a, &a.out)?),
        Command::Classical(a) => cmd_classical(&resolve(a, &a.out)?),
    }
}

/// Flags layered over the `--config` file, whose keys must be flag names.
fn resolve<T: Args + Serialize + DeserializeOwned>(flags: &T, out: &OutputArgs) -> Result<T> {
    let mut merged = match &out.config {
        Some(path) => {
            let value: serde_json::Value = read_json(path)?;
            let serde_json::Value::Object(map) = value else {
                return Err(Error::config(format!("{} is not a JSON object", path.display())));
            };
            let known: Vec<String> = T::augment_args(clap::Command::new("config"))
                .get_arguments()
                .map(|a| a.get_id().as_str().replace('_', "-"))
                .filter(|k| k != "config")
                .collect();
            if let Some(key) = map.keys().find(|k| !known.contains(k)) {
                return Err(Error::config(format!("unknown key {key:?} in {}", path.display())));
            }
            map
        }
        None => serde_json::Map::new(),
    };
    if let serde_json::Value::Object(map) = serde_json::to_value(flags)? {
        merged.extend(map);
    }
    serde_json::from_value(serde_json::Value::Object(merged))
        .map_err(|e| Error::config(format!("invalid configuration: {e}")))
}

fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::config(format!("--{flag} is required")))
}

struct Outputs {
    csv: PathBuf,
}

impl Outputs {
    fn new(out: &OutputArgs, command: &str) -> Result<Self> {
        let csv = match &out.output {
            Some(p) => p.clone(),
            None => {
                let dir = out
                    .out_dir
                    .clone()
                    .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                    .unwrap_or_else(|| PathBuf::from("."));
                dir.join(format!("{command}.csv"))
            }
        };
        if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        Ok(Outputs { csv })
    }

    /// `<stem>.<suffix>` next to the CSV.
    fn sibling(&self, suffix: &str) -> PathBuf {
        let stem = self.csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        self.csv.with_file_name(format!("{stem}.{suffix}"))
    }

    fn finish(&self, mut manifest: RunManifest, mut written: Vec<PathBuf>) -> Result<Vec<PathBuf>> {
        let path = self.sibling("manifest.json");
        manifest.outputs = written.clone();
        write_json(&path, &manifest)?;
        written.push(path);
        Ok(written)
    }
}

fn load_json_arg<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        serde_json::from_str(trimmed).map_err(|e| Error::config(format!("invalid JSON {arg:?}: {e}")))
    } else {
        read_json(Path::new(arg))
    }
}

fn parse_coin(arg: Option<&str>) -> Result<Gate2> {
    match arg {
        None | Some("hadamard") => Ok(hadamard()),
        Some(s) => {
            let m = load_json_arg::<MatrixJson>(s)?.to_matrix()?;
            if m.shape() != (2, 2) {
                return Err(Error::config(format!("coin must be 2x2, got {:?}", m.shape())));
            }
            Ok(Gate2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]))
        }
    }
}

fn parse_initial_coin(arg: Option<&str>) -> Result<[Complex64; 2]> {
    match arg {
        None | Some("plus-i") => Ok(plus_i_coin()),
        Some(s) => {
            let [a, b]: [[f64; 2]; 2] = load_json_arg(s)?;
            Ok([Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1])])
        }
    }
}

fn template_from(a: &SimulateArgs) -> Result<QuenchTemplate> {
    let sites = require(a.sites, "sites")?;
    let steps = require(a.steps, "steps")?;
    let environment = match a.model.unwrap_or(ModelKind::Nonlocal) {
        ModelKind::Nonlocal => EnvTemplate::Nonlocal {
            env_dim: match &a.env_file {
                Some(_) => 0,
                None => require(a.env_dim, "env-dim")?,
            },
            spread: a.spread.unwrap_or(DEFAULT_SPREAD),
        },
        ModelKind::Local => EnvTemplate::Local {
            g0: GateAngles::new(require(a.theta0, "theta0")?, require(a.phi0, "phi0")?)?,
            g1: GateAngles::new(require(a.theta1, "theta1")?, require(a.phi1, "phi1")?)?,
        },
    };
    let mut t = QuenchTemplate::new(sites, environment, steps);
    let coin = parse_coin(a.coin.as_deref())?;
    t.coin = [coin[(0, 0)], coin[(0, 1)], coin[(1, 0)], coin[(1, 1)]];
    t.initial_coin = parse_initial_coin(a.initial_coin.as_deref())?;
    if let Some(s) = a.initial_site {
        t.initial_site = s;
    }
    Ok(t)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Vec<PathBuf>> {
    let template = template_from(a)?;
    let seed = a.seed.unwrap_or(0);
    let local = matches!(template.environment, EnvTemplate::Local { .. });
    let samples = a.samples.unwrap_or(if local { 1 } else { DEFAULT_SAMPLES });
    if samples == 0 {
        return Err(Error::config("--samples must be at least 1"));
    }
    if (a.env_file.is_some() || a.snapshot.is_some()) && samples != 1 {
        return Err(Error::config("--env-file and --snapshot need --samples 1"));
    }
    if a.env_file.is_some() && local {
        return Err(Error::config("--env-file applies to the nonlocal model"));
    }
    let out = Outputs::new(&a.out, "simulate")?;
    let mut written = Vec::new();

    let single_model = match &a.env_file {
        Some(path) => {
            let (e0, e1) = read_json::<EnvironmentFile>(path)?.matrices()?;
            Some(template.model_with_environment(Environment::Nonlocal { e0, e1 }, seed)?)
        }
        None if a.snapshot.is_some() || a.export_env.is_some() => Some(template.model_for_sample(seed, 0)?),
        None => None,
    };
    if let (Some(path), Some(model)) = (&a.export_env, &single_model) {
        match &model.environment {
            Environment::Nonlocal { e0, e1 } => write_json(path, &EnvironmentFile::new(e0, e1))?,
            Environment::Local { .. } => return Err(Error::config("--export-env applies to the nonlocal model")),
        }
        written.push(path.clone());
    }

    let file = File::create(&out.csv)?;
    match (&single_model, samples) {
        (Some(model), 1) => {
            let (mut d, mut h) = (Vec::new(), Vec::new());
            let last = evolve(model, template.steps, |_, s| {
                let (dw, hw) = position_diagnostics(s)?;
                d.push(dw);
                h.push(hw);
                Ok(())
            })?;
            let series = ObservableSeries::new(d, h, SeriesMetadata::default())?;
            write_series_csv(file, &series, None)?;
            if let Some(path) = &a.snapshot {
                write_snapshot(File::create(path)?, &last)?;
                written.push(path.clone());
            }
        }
        _ => {
            let q = quench_average(&template, samples, seed)?;
            write_series_csv(file, &q.mean, (samples > 1).then_some(&q.d_omega_std[..]))?;
        }
    }
    written.insert(0, out.csv.clone());

    let params = serde_json::json!({ "args": a, "template": template, "samples": samples });
    let streams = if local || a.env_file.is_some() { 0 } else { samples };
    out.finish(RunManifest::new("simulate", params, Some(seed), streams), written)
}

fn mixing_csv(sweep: &MixingSweep) -> String {
    let opt = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
    let mut s = String::from("d_B,tau_mix,tau_err,status\n");
    for r in &sweep.rows {
        s += &format!("{},{},{},{}\n", r.bath_dim, opt(r.tau_mix), opt(r.tau_err), r.status);
    }
    let c = &sweep.classical;
    let se = c.fit.param("tau_mix").map(|p| p.std_error);
    s += &format!("inf,{},{},classical\n", format_f64(c.tau()), opt(se));
    s
}

fn cmd_mixing_sweep(a: &MixingArgs) -> Result<Vec<PathBuf>> {
    let sites = require(a.sites, "sites")?;
    let steps = require(a.steps, "steps")?;
    let env_dims = a.env_dims.clone().ok_or_else(|| Error::config("--env-dims is required"))?;
    let samples = a.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = a.seed.unwrap_or(0);
    let base = QuenchTemplate::nonlocal(sites, 0, a.spread.unwrap_or(DEFAULT_SPREAD), steps);
    let out = Outputs::new(&a.out, "mixing_sweep")?;
    let sweep = mixing_sweep(&base, &env_dims, samples, seed)?;
    fs::write(&out.csv, mixing_csv(&sweep))?;
    let json = out.sibling("json");
    write_json(&json, &serde_json::json!({ "version": env!("CARGO_PKG_VERSION"), "sweep": sweep }))?;
    let params = serde_json::json!({ "args": a, "template": base, "samples": samples });
    out.finish(RunManifest::new("mixing-sweep", params, Some(seed), samples), vec![out.csv.clone(), json])
}

fn saturation_grid(a: &SaturationArgs) -> Result<Vec<GridPoint>> {
    let sites_list = a.sites_list.clone().ok_or_else(|| Error::config("--sites-list is required"))?;
    let steps = a.steps.clone().ok_or_else(|| Error::config("--steps is required"))?;
    if steps.len() != 1 && steps.len() != sites_list.len() {
        return Err(Error::config(format!(
            "--steps has {} entries for {} lattice sizes",
            steps.len(),
            sites_list.len()
        )));
    }
    let mut grid = Vec::new();
    for (i, &sites) in sites_list.iter().enumerate() {
        let steps = steps[if steps.len() == 1 { 0 } else { i }];
        let env_dims: Vec<usize> = match (&a.env_dims, &a.ratios) {
            (Some(d), None) => d.clone(),
            (None, Some(r)) => r.iter().map(|&r| ((r * sites as f64 / 2.0).round() as usize).max(1)).collect(),
            _ => return Err(Error::config("give exactly one of --env-dims and --ratios")),
        };
        grid.extend(env_dims.into_iter().map(|env_dim| GridPoint { sites, env_dim, steps }));
    }
    Ok(grid)
}

fn saturation_csv(sweep: &SaturationSweep) -> String {
    let mut s = String::from("d_S,d_B,ratio,mean_D,std_D,n\n");
    for p in &sweep.points {
        s += &format!(
            "{},{},{},{},{},{}\n",
            p.sites,
            p.bath_dim,
            format_f64(p.ratio),
            format_f64(p.mean_d),
            format_f64(p.std_d),
            p.samples
        );
    }
    s
}

fn cmd_saturation_sweep(a: &SaturationArgs) -> Result<Vec<PathBuf>> {
    let grid = saturation_grid(a)?;
    let samples = a.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = a.seed.unwrap_or(0);
    let base = QuenchTemplate::nonlocal(grid[0].sites, 0, a.spread.unwrap_or(DEFAULT_SPREAD), 0);
    let out = Outputs::new(&a.out, "saturation_sweep")?;
    let sweep = saturation_sweep(&base, &grid, samples, seed)?;
    if let Some(w) = &sweep.warning {
        eprintln!("warning: {w}");
    }
    fs::write(&out.csv, saturation_csv(&sweep))?;
    let json = out.sibling("fit.json");
    write_json(&json, &serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "base_seed": seed,
        "spread": a.spread.unwrap_or(DEFAULT_SPREAD),
        "fit": sweep.fit,
        "warning": sweep.warning,
        "points": sweep.points,
    }))?;
    let params = serde_json::json!({ "args": a, "grid": grid, "samples": samples });
    out.finish(RunManifest::new("saturation-sweep", params, Some(seed), samples), vec![out.csv.clone(), json])
}

fn cmd_classical(a: &ClassicalArgs) -> Result<Vec<PathBuf>> {
    let sites = require(a.sites, "sites")?;
    let steps = require(a.steps, "steps")?;
    let series = classical_distance_series(sites, a.start.unwrap_or(sites / 2), steps)?;
    let out = Outputs::new(&a.out, "classical")?;
    write_series_csv(File::create(&out.csv)?, &series, None)?;
    let params = serde_json::json!({ "args": a });
    out.finish(RunManifest::new("classical", params, None, 0), vec![out.csv.clone()])
}
