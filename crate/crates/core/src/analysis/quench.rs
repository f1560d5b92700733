use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ObservableSeries, SeriesMetadata};
use crate::core_sim::{evolve, hadamard, plus_i_coin, Environment, Gate2, WalkModel};
use crate::env_gen::{make_local_gate, sample_environment, GateAngles};
use crate::error::{Error, Result};
use crate::observables::position_diagnostics;
use crate::rng::sample_stream;

/// How each quench sample gets its environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnvTemplate {
    /// Fresh `E_c = exp(−iH_c)` per sample, `H_c` entries in `[−spread, spread]`.
    Nonlocal { env_dim: usize, spread: f64 },
    /// Fixed local gates; every sample is the same walk.
    Local { g0: GateAngles, g1: GateAngles },
}

/// Everything about a walk except the sampled environment matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchTemplate {
    pub sites: usize,
    pub environment: EnvTemplate,
    /// Row-major 2×2 coin.
    pub coin: [Complex64; 4],
    pub initial_site: usize,
    pub initial_coin: [Complex64; 2],
    /// Environment initial state; `None` means `|0⟩`.
    pub initial_env: Option<Vec<Complex64>>,
    pub steps: usize,
}

impl QuenchTemplate {
    /// Hadamard coin, walker at the middle site with coin `(|0⟩+i|1⟩)/√2`.
    pub fn new(sites: usize, environment: EnvTemplate, steps: usize) -> Self {
        let h = hadamard();
        QuenchTemplate {
            sites,
            environment,
            coin: [h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]],
            initial_site: sites / 2,
            initial_coin: plus_i_coin(),
            initial_env: None,
            steps,
        }
    }

    pub fn nonlocal(sites: usize, env_dim: usize, spread: f64, steps: usize) -> Self {
        QuenchTemplate::new(sites, EnvTemplate::Nonlocal { env_dim, spread }, steps)
    }

    pub fn coin_gate(&self) -> Gate2 {
        Gate2::new(self.coin[0], self.coin[1], self.coin[2], self.coin[3])
    }

    pub fn bath_dim(&self) -> usize {
        match self.environment {
            EnvTemplate::Nonlocal { env_dim, .. } => 2 * env_dim,
            EnvTemplate::Local { .. } => 2usize << self.sites,
        }
    }

    /// The walk of sample `k`, with its environment drawn from stream `(base_seed, k)`.
    pub fn model_for_sample(&self, base_seed: u64, sample: u64) -> Result<WalkModel> {
        let environment = match &self.environment {
            EnvTemplate::Nonlocal { env_dim, spread } => {
                let mut rng = sample_stream(base_seed, sample);
                let (e0, e1) = sample_environment(*env_dim, *spread, &mut rng)?;
                Environment::Nonlocal { e0, e1 }
            }
            EnvTemplate::Local { g0, g1 } => Environment::Local { g0: make_local_gate(*g0), g1: make_local_gate(*g1) },
        };
        self.model_with_environment(environment, base_seed)
    }

    /// The template's walk with a given environment, e.g. one read from disk.
    pub fn model_with_environment(&self, environment: Environment, base_seed: u64) -> Result<WalkModel> {
        let mut model = WalkModel::new(self.sites, environment)?
            .with_coin(self.coin_gate())
            .with_initial_site(self.initial_site)
            .with_initial_coin(self.initial_coin)
            .with_seed(base_seed);
        if let Some(env) = &self.initial_env {
            model = model.with_initial_env(env.clone());
        }
        model.validate()?;
        Ok(model)
    }
}

/// Runs `model` for `steps` steps and records `D_ω(t)` and `H(t)`.
pub fn record_series(model: &WalkModel, steps: usize, metadata: SeriesMetadata) -> Result<ObservableSeries> {
    let mut d_omega = Vec::with_capacity(steps + 1);
    let mut entropy = Vec::with_capacity(steps + 1);
    evolve(model, steps, |_, state| {
        let (d, h) = position_diagnostics(state)?;
        d_omega.push(d);
        entropy.push(h);
        Ok(())
    })?;
    ObservableSeries::new(d_omega, entropy, metadata)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchResult {
    /// Pointwise mean over samples.
    pub mean: ObservableSeries,
    /// Pointwise sample standard deviation (zero for a single sample).
    pub d_omega_std: Vec<f64>,
    pub entropy_std: Vec<f64>,
    pub samples: Vec<ObservableSeries>,
}

/// Pointwise mean and standard deviation, folded in sample order.
pub fn aggregate(samples: Vec<ObservableSeries>, metadata: SeriesMetadata) -> Result<QuenchResult> {
    let Some(first) = samples.first() else {
        return Err(Error::domain("cannot aggregate zero samples"));
    };
    let len = first.len();
    if samples.iter().any(|s| s.len() != len) {
        return Err(Error::dimension("quench samples differ in length"));
    }
    let n = samples.len() as f64;
    let column_stats = |pick: fn(&ObservableSeries) -> &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut mean = vec![0.0; len];
        for s in &samples {
            for (m, x) in mean.iter_mut().zip(pick(s)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; len];
        if samples.len() > 1 {
            for s in &samples {
                for ((v, x), m) in var.iter_mut().zip(pick(s)).zip(&mean) {
                    *v += (x - m) * (x - m);
                }
            }
            var.iter_mut().for_each(|v| *v = (*v / (n - 1.0)).sqrt());
        }
        (mean, var)
    };
    let (d_mean, d_std) = column_stats(ObservableSeries::d_omega);
    let (h_mean, h_std) = column_stats(ObservableSeries::entropy);
    Ok(QuenchResult {
        mean: ObservableSeries::new(d_mean, h_mean, metadata)?,
        d_omega_std: d_std,
        entropy_std: h_std,
        samples,
    })
}

/// Runs `n_samples` walks, sample `k` with environment stream `(base_seed, k)`,
/// and averages them pointwise.
///
/// Samples may run concurrently; the result does not depend on scheduling.
pub fn quench_average(template: &QuenchTemplate, n_samples: usize, base_seed: u64) -> Result<QuenchResult> {
    if n_samples == 0 {
        return Err(Error::domain("quench average needs at least one sample"));
    }
    let runs: Vec<Result<ObservableSeries>> = (0..n_samples as u64)
        .into_par_iter()
        .map(|k| {
            let model = template.model_for_sample(base_seed, k)?;
            let meta = SeriesMetadata {
                description: describe(template),
                sites: Some(template.sites),
                seed: Some(base_seed),
                sample: Some(k),
            };
            record_series(&model, template.steps, meta)
        })
        .collect();
    let mut samples = Vec::with_capacity(n_samples);
    for (k, run) in runs.into_iter().enumerate() {
        samples.push(run.map_err(|e| Error::Sample { index: k as u64, source: Box::new(e) })?);
    }
    let meta = SeriesMetadata {
        description: format!("quench mean of {n_samples}: {}", describe(template)),
        sites: Some(template.sites),
        seed: Some(base_seed),
        sample: None,
    };
    aggregate(samples, meta)
}

fn describe(t: &QuenchTemplate) -> String {
    match &t.environment {
        EnvTemplate::Nonlocal { env_dim, spread } => {
            format!("nonlocal d_S={} d_E={} spread={} T={}", t.sites, env_dim, spread, t.steps)
        }
        EnvTemplate::Local { g0, g1 } => format!(
            "local d_S={} theta0={} phi0={} theta1={} phi1={} T={}",
            t.sites,
            g0.theta(),
            g0.phi(),
            g1.theta(),
            g1.phi(),
            t.steps
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_aggregate_is_identity() {
        let template = QuenchTemplate::nonlocal(5, 3, 1.0, 30);
        let q = quench_average(&template, 1, 42).unwrap();
        assert_eq!(q.mean.d_omega(), q.samples[0].d_omega());
        assert_eq!(q.mean.entropy(), q.samples[0].entropy());
        assert!(q.d_omega_std.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn quench_is_deterministic() {
        let template = QuenchTemplate::nonlocal(7, 4, 1.0, 40);
        let a = quench_average(&template, 3, 9).unwrap();
        let b = quench_average(&template, 3, 9).unwrap();
        assert_eq!(a, b);
        let c = quench_average(&template, 3, 10).unwrap();
        assert_ne!(a.mean.d_omega(), c.mean.d_omega());
    }

    #[test]
    fn mean_lies_between_samples() {
        let template = QuenchTemplate::nonlocal(7, 3, 1.0, 60);
        let q = quench_average(&template, 4, 1).unwrap();
        for t in 0..q.mean.len() {
            let vals: Vec<f64> = q.samples.iter().map(|s| s.d_omega()[t]).collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let m = q.mean.d_omega()[t];
            assert!(m >= lo - 1e-15 && m <= hi + 1e-15);
        }
    }

    #[test]
    fn failing_sample_is_named() {
        let template = QuenchTemplate::nonlocal(6, 2, 1.0, 5);
        match quench_average(&template, 2, 0) {
            Err(Error::Sample { index: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
