//! Multi-run experiments: mixing time against bath size, and plateau level
//! against `d_B/d_S`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    default_t0, fit_exponential_mixing, fit_power_law, long_time_average, quench_average,
    relaxation_window, select_fit_window, EnvTemplate, FitResult, ObservableSeries, QuenchResult, QuenchTemplate,
};
use crate::classical_baseline::{classical_mixing_time, ClassicalMixing};
use crate::error::{Error, Result};

/// Which window rule produced a mixing-time fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowRule {
    /// Onset at `0.9·D(0)`, end at `1.5·P̂`.
    Policy,
    /// Onset as above, end halfway from `D(t1)` to the plateau.
    Relaxation,
}

/// Errors that mean "this series has no usable fit" rather than a broken run.
fn is_fit_failure(e: &Error) -> bool {
    matches!(e, Error::FitWindow(_) | Error::NoDecay { .. } | Error::Domain(_))
}

/// Exponential fit of one series: the default window, or the relaxation
/// window when the default one does not exist.
pub fn fit_mixing_time(series: &ObservableSeries) -> Result<(FitResult, WindowRule)> {
    match select_fit_window(series) {
        Ok(w) => Ok((fit_exponential_mixing(series, w)?, WindowRule::Policy)),
        Err(Error::FitWindow(first)) => {
            let w = relaxation_window(series)
                .map_err(|e| Error::FitWindow(format!("{first}; relaxation fallback: {e}")))?;
            Ok((fit_exponential_mixing(series, w)?, WindowRule::Relaxation))
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingRow {
    pub env_dim: usize,
    pub bath_dim: usize,
    /// Mean of the per-sample fitted mixing times; `None` if no sample fitted.
    pub tau_mix: Option<f64>,
    /// Standard error of that mean (the regression error for a single sample).
    pub tau_err: Option<f64>,
    pub samples: usize,
    pub fitted: usize,
    pub relaxation_windows: usize,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingSweep {
    pub sites: usize,
    pub steps: usize,
    pub base_seed: u64,
    pub rows: Vec<MixingRow>,
    pub classical: ClassicalMixing,
}

fn mixing_row(q: &QuenchResult, env_dim: usize, bath_dim: usize) -> MixingRow {
    let mut taus = Vec::new();
    let mut single_se = None;
    let mut relaxation = 0;
    let mut first_error = None;
    for s in &q.samples {
        match fit_mixing_time(s) {
            Ok((fit, rule)) => {
                taus.push(fit.tau_mix());
                single_se = fit.param("tau_mix").map(|p| p.std_error);
                relaxation += usize::from(rule == WindowRule::Relaxation);
            }
            Err(e) => {
                first_error.get_or_insert(e.to_string());
            }
        }
    }
    let n = q.samples.len();
    let (tau_mix, tau_err) = match taus.len() {
        0 => (None, None),
        1 => (Some(taus[0]), single_se),
        k => {
            let kf = k as f64;
            let mean = taus.iter().sum::<f64>() / kf;
            let var = taus.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (kf - 1.0);
            (Some(mean), Some((var / kf).sqrt()))
        }
    };
    let mut status = Vec::new();
    if taus.len() < n {
        status.push(format!("fitted {}/{n}", taus.len()));
    }
    if relaxation > 0 {
        status.push(format!("relaxation-window {relaxation}/{}", taus.len()));
    }
    if let (true, Some(e)) = (taus.is_empty(), first_error) {
        status.push(e);
    }
    let status = if status.is_empty() { "ok".to_string() } else { status.join("; ").replace(',', ";") };
    MixingRow { env_dim, bath_dim, tau_mix, tau_err, samples: n, fitted: taus.len(), relaxation_windows: relaxation, status }
}

fn with_env_dim(base: &QuenchTemplate, env_dim: usize) -> Result<QuenchTemplate> {
    let spread = match base.environment {
        EnvTemplate::Nonlocal { spread, .. } => spread,
        EnvTemplate::Local { .. } => return Err(Error::config("bath-size sweeps need the nonlocal model")),
    };
    Ok(QuenchTemplate { environment: EnvTemplate::Nonlocal { env_dim, spread }, ..base.clone() })
}

/// Quench-averaged mixing time for each environment dimension, plus the
/// classical reference.
///
/// Fit failures are recorded in the row's status; simulation failures abort.
pub fn mixing_sweep(base: &QuenchTemplate, env_dims: &[usize], samples: usize, base_seed: u64) -> Result<MixingSweep> {
    if env_dims.is_empty() {
        return Err(Error::config("mixing sweep needs at least one environment dimension"));
    }
    let templates = env_dims.iter().map(|&d| with_env_dim(base, d)).collect::<Result<Vec<_>>>()?;
    let rows = templates
        .par_iter()
        .zip(env_dims)
        .map(|(t, &d)| {
            let q = quench_average(t, samples, base_seed)?;
            Ok(mixing_row(&q, d, t.bath_dim()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MixingSweep { sites: base.sites, steps: base.steps, base_seed, rows, classical: classical_mixing_time(base.sites)? })
}

/// Where the long-time average of a quench mean starts: `t2 + 5τ` from its
/// own mixing fit, or `T/2` when it has none.
pub fn plateau_start(mean: &ObservableSeries) -> usize {
    let final_time = mean.final_time();
    match fit_mixing_time(mean) {
        Ok((fit, _)) => match fit.window() {
            Some((_, t2)) => default_t0(t2, fit.tau_mix(), final_time),
            None => final_time / 2,
        },
        Err(_) => final_time / 2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationPoint {
    pub sites: usize,
    pub env_dim: usize,
    pub bath_dim: usize,
    pub ratio: f64,
    /// Long-time average of the quench-mean distance.
    pub mean_d: f64,
    /// Sample standard deviation of the per-sample long-time averages.
    pub std_d: f64,
    pub samples: usize,
    pub steps: usize,
    pub t0: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationSweep {
    pub base_seed: u64,
    pub points: Vec<SaturationPoint>,
    /// `⟨D⟩ ≈ C·(d_B/d_S)^{−x}` over the points with `d_B > d_S`.
    pub fit: Option<FitResult>,
    pub warning: Option<String>,
}

/// One grid point of a saturation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub sites: usize,
    pub env_dim: usize,
    pub steps: usize,
}

pub fn saturation_point(template: &QuenchTemplate, samples: usize, base_seed: u64) -> Result<SaturationPoint> {
    let q = quench_average(template, samples, base_seed)?;
    let t_end = q.mean.final_time();
    let t0 = plateau_start(&q.mean);
    let mean_d = long_time_average(&q.mean, t0, t_end)?;
    let per_sample = q
        .samples
        .iter()
        .map(|s| long_time_average(s, t0, t_end))
        .collect::<Result<Vec<_>>>()?;
    let n = per_sample.len() as f64;
    let std_d = if per_sample.len() > 1 {
        let m = per_sample.iter().sum::<f64>() / n;
        (per_sample.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let env_dim = match template.environment {
        EnvTemplate::Nonlocal { env_dim, .. } => env_dim,
        EnvTemplate::Local { .. } => 1 << template.sites,
    };
    let bath_dim = template.bath_dim();
    Ok(SaturationPoint {
        sites: template.sites,
        env_dim,
        bath_dim,
        ratio: bath_dim as f64 / template.sites as f64,
        mean_d,
        std_d,
        samples,
        steps: template.steps,
        t0,
    })
}

/// Plateau level at every grid point and the power-law fit over `d_B > d_S`.
///
/// `base` supplies coin, initial state and spread; each grid point overrides
/// sites, environment dimension and step count. With fewer than four
/// eligible points the fit is skipped and `warning` says why.
pub fn saturation_sweep(base: &QuenchTemplate, grid: &[GridPoint], samples: usize, base_seed: u64) -> Result<SaturationSweep> {
    if grid.is_empty() {
        return Err(Error::config("saturation sweep needs at least one grid point"));
    }
    let templates = grid
        .iter()
        .map(|g| {
            let t = with_env_dim(base, g.env_dim)?;
            Ok(QuenchTemplate { sites: g.sites, initial_site: g.sites / 2, steps: g.steps, ..t })
        })
        .collect::<Result<Vec<_>>>()?;
    let points = templates
        .par_iter()
        .map(|t| saturation_point(t, samples, base_seed))
        .collect::<Result<Vec<_>>>()?;
    let eligible: Vec<(f64, f64)> = points.iter().filter(|p| p.bath_dim > p.sites).map(|p| (p.ratio, p.mean_d)).collect();
    let (fit, warning) = if eligible.len() < 4 {
        (None, Some(format!("power-law fit skipped: {} points with d_B > d_S, need 4", eligible.len())))
    } else {
        match fit_power_law(&eligible) {
            Ok(f) => (Some(f), None),
            Err(e) if is_fit_failure(&e) => (None, Some(format!("power-law fit failed: {e}"))),
            Err(e) => return Err(e),
        }
    };
    Ok(SaturationSweep { base_seed, points, fit, warning })
}
