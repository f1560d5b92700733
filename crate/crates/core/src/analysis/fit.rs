use super::{FitParameter, FitResult, FitSupport, ObservableSeries};
use crate::error::{Error, Result};

/// Shortest series the window policy accepts.
pub const MIN_SERIES_LEN: usize = 50;
/// Minimum `t2 − t1` of a fit window.
pub const MIN_WINDOW: usize = 10;
/// Plateau estimates at or below this value count as "no plateau"; the
/// window then runs while `D_ω > PLATEAU_FLOOR`.
pub const PLATEAU_FLOOR: f64 = 1e-6;

const ONSET_FRACTION: f64 = 0.9;
const PLATEAU_MARGIN: f64 = 1.5;

/// Ordinary least squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub residual_rms: f64,
    pub n: usize,
}

impl LinearFit {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n < 2 {
            return Err(Error::domain(format!("linear fit needs >= 2 paired points, got {n}")));
        }
        let nf = n as f64;
        let mx = x.iter().sum::<f64>() / nf;
        let my = y.iter().sum::<f64>() / nf;
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            sxx += (xi - mx) * (xi - mx);
            sxy += (xi - mx) * (yi - my);
        }
        if sxx <= 0.0 {
            return Err(Error::domain("linear fit needs at least two distinct abscissae"));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ssr: f64 = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = yi - (intercept + slope * xi);
                r * r
            })
            .sum();
        let sigma2 = if n > 2 { ssr / (nf - 2.0) } else { 0.0 };
        Ok(LinearFit {
            slope,
            intercept,
            slope_se: (sigma2 / sxx).sqrt(),
            intercept_se: (sigma2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
            residual_rms: (ssr / nf).sqrt(),
            n,
        })
    }
}

/// Raw `(t1, t2)` of the window policy, without the minimum-length check.
///
/// * `t1`: first `t ≥ ⌈d_S/2⌉` with `D(t) ≤ 0.9·D(0)`.
/// * `P̂`: mean of the final quarter of the series.
/// * `t2`: if `P̂ > PLATEAU_FLOOR`, the step before `D` first drops below
///   `1.5·P̂`; otherwise the last `t` with `D(t) > PLATEAU_FLOOR`.
///
/// Returns `None` when either end does not exist.
pub fn window_bounds(series: &ObservableSeries) -> Option<(usize, usize)> {
    let d = series.d_omega();
    let skip = series.metadata.sites.map_or(0, |s| s.div_ceil(2));
    let t1 = (skip..d.len()).find(|&t| d[t] <= ONSET_FRACTION * d[0])?;
    let plateau = plateau_estimate(d);
    let t2 = if plateau > PLATEAU_FLOOR {
        let threshold = PLATEAU_MARGIN * plateau;
        d.iter().position(|&x| x < threshold)?.checked_sub(1)?
    } else {
        d.iter().rposition(|&x| x > PLATEAU_FLOOR)?
    };
    Some((t1, t2))
}

/// Time window of the initial exponential decay (see [`window_bounds`]).
pub fn select_fit_window(series: &ObservableSeries) -> Result<(usize, usize)> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::FitWindow(format!(
            "series has {} points, need at least {MIN_SERIES_LEN}",
            series.len()
        )));
    }
    match window_bounds(series) {
        Some((t1, t2)) if t2 >= t1 + MIN_WINDOW => Ok((t1, t2)),
        Some((t1, t2)) => Err(Error::FitWindow(format!(
            "window [{t1}, {t2}] is shorter than {MIN_WINDOW} steps"
        ))),
        None => Err(Error::FitWindow("distance never decays into a fit window".into())),
    }
}

/// Fallback window for series that saturate far from `ω`, where `1.5·P̂`
/// already lies above `D(t1)` and the default policy finds nothing.
///
/// Same `t1`; `t2` is the step before `D` first drops below the midpoint
/// `(D(t1) + P̂)/2`. The same minimum length applies.
pub fn relaxation_window(series: &ObservableSeries) -> Result<(usize, usize)> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::FitWindow(format!(
            "series has {} points, need at least {MIN_SERIES_LEN}",
            series.len()
        )));
    }
    let d = series.d_omega();
    let skip = series.metadata.sites.map_or(0, |s| s.div_ceil(2));
    let t1 = (skip..d.len())
        .find(|&t| d[t] <= ONSET_FRACTION * d[0])
        .ok_or_else(|| Error::FitWindow("distance never decays below 0.9·D(0)".into()))?;
    let plateau = plateau_estimate(d);
    if !(d[t1] > plateau) {
        return Err(Error::FitWindow(format!("D({t1}) is already at the plateau {plateau}")));
    }
    let target = 0.5 * (d[t1] + plateau);
    let t2 = match (t1..d.len()).find(|&t| d[t] < target) {
        Some(t) => t - 1,
        None => return Err(Error::FitWindow("distance never reaches the relaxation midpoint".into())),
    };
    if t2 < t1 + MIN_WINDOW {
        return Err(Error::FitWindow(format!("window [{t1}, {t2}] is shorter than {MIN_WINDOW} steps")));
    }
    Ok((t1, t2))
}

fn plateau_estimate(d: &[f64]) -> f64 {
    let tail = d.len().div_ceil(4);
    d[d.len() - tail..].iter().sum::<f64>() / tail as f64
}

/// Least squares of `ln D_ω(t)` against `t` over `t1..=t2`; `τ_mix = −1/slope`.
pub fn fit_exponential_mixing(series: &ObservableSeries, window: (usize, usize)) -> Result<FitResult> {
    let (t1, t2) = window;
    if t1 >= t2 || t2 > series.final_time() {
        return Err(Error::FitWindow(format!(
            "window [{t1}, {t2}] invalid for series ending at t = {}",
            series.final_time()
        )));
    }
    let d = &series.d_omega()[t1..=t2];
    if let Some(i) = d.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::domain(format!("D_omega({}) = {} is not positive", t1 + i, d[i])));
    }
    let ts: Vec<f64> = (t1..=t2).map(|t| t as f64).collect();
    let logs: Vec<f64> = d.iter().map(|x| x.ln()).collect();
    let lin = LinearFit::new(&ts, &logs)?;
    if !(lin.slope < 0.0) {
        return Err(Error::NoDecay { slope: lin.slope });
    }
    let tau = -1.0 / lin.slope;
    Ok(FitResult {
        params: vec![
            FitParameter { name: "tau_mix".into(), value: tau, std_error: lin.slope_se / (lin.slope * lin.slope) },
            FitParameter { name: "ln_prefactor".into(), value: lin.intercept, std_error: lin.intercept_se },
        ],
        support: FitSupport::Window { t1, t2 },
        residual_rms: lin.residual_rms,
    })
}

/// `Σ_{t'=t0}^{t} D_ω(t') / (t − t0 + 1)`.
pub fn long_time_average(series: &ObservableSeries, t0: usize, t: usize) -> Result<f64> {
    if t0 > t || t > series.final_time() {
        return Err(Error::domain(format!(
            "averaging range [{t0}, {t}] is empty or beyond T = {}",
            series.final_time()
        )));
    }
    let window = &series.d_omega()[t0..=t];
    Ok(window.iter().sum::<f64>() / (t - t0 + 1) as f64)
}

/// Start of the long-time average: `t2 + ⌈5·τ_mix⌉`, but no later than `T/2`.
pub fn default_t0(t2: usize, tau_mix: f64, final_time: usize) -> usize {
    let settle = if tau_mix.is_finite() && tau_mix > 0.0 { (5.0 * tau_mix).ceil() as usize } else { 0 };
    (t2.saturating_add(settle)).min(final_time / 2)
}

/// Least squares of `ln y` against `ln r`: `y ≈ C·r^{−x}`.
///
/// Points are sorted before fitting, so the result does not depend on their
/// order.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::domain(format!("power-law fit needs >= 4 points, got {}", points.len())));
    }
    if let Some(&(r, y)) = points.iter().find(|&&(r, y)| !(r > 0.0) || !(y > 0.0)) {
        return Err(Error::domain(format!("power-law point ({r}, {y}) is not positive")));
    }
    if let Some(&(r, _)) = points.iter().find(|&&(r, _)| r <= 1.0) {
        return Err(Error::domain(format!("power-law fit needs d_B/d_S > 1, got {r}")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let lr: Vec<f64> = sorted.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = sorted.iter().map(|p| p.1.ln()).collect();
    let lin = LinearFit::new(&lr, &ly)?;
    let c = lin.intercept.exp();
    Ok(FitResult {
        params: vec![
            FitParameter { name: "C".into(), value: c, std_error: c * lin.intercept_se },
            FitParameter { name: "x".into(), value: -lin.slope, std_error: lin.slope_se },
        ],
        support: FitSupport::Points { count: sorted.len() },
        residual_rms: lin.residual_rms,
    })
}
