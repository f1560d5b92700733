//! Unbiased classical random walk on the odd ring.
//!
//! Serves as the reference the quantum mixing times are compared to. The
//! walk hops left or right with probability ½ each and never stays put.

use serde::{Deserialize, Serialize};

use crate::analysis::{fit_exponential_mixing, select_fit_window, FitResult, ObservableSeries, SeriesMetadata};
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::domain("probability vector is empty"));
        }
        if let Some(x) = p.iter().find(|&&x| !(x >= 0.0)) {
            return Err(Error::domain(format!("negative probability {x}")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("probabilities sum to {total}")));
        }
        Ok(ProbabilityVector(p))
    }

    pub fn localized(sites: usize, site: usize) -> Result<Self> {
        if site >= sites {
            return Err(Error::config(format!("site {site} outside ring of {sites}")));
        }
        let mut p = vec![0.0; sites];
        p[site] = 1.0;
        Ok(ProbabilityVector(p))
    }

    pub fn uniform(sites: usize) -> Self {
        ProbabilityVector(vec![1.0 / sites as f64; sites])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `½ Σ |p_s − 1/d_S|`.
    pub fn distance_to_uniform(&self) -> f64 {
        let u = 1.0 / self.0.len() as f64;
        0.5 * self.0.iter().map(|p| (p - u).abs()).sum::<f64>()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        0.0 - self.0.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    }
}

/// `p'_s = ½ p_{s−1} + ½ p_{s+1}` with periodic indices.
pub fn classical_step(p: &ProbabilityVector) -> ProbabilityVector {
    let n = p.len();
    let q = &p.0;
    ProbabilityVector((0..n).map(|s| 0.5 * q[(s + n - 1) % n] + 0.5 * q[(s + 1) % n]).collect())
}

fn check_odd(sites: usize) -> Result<()> {
    if sites == 0 || sites.is_multiple_of(2) {
        return Err(Error::config(format!("classical ring needs an odd site count, got {sites}")));
    }
    Ok(())
}

/// Distance to uniform (and Shannon entropy) for `t = 0..=steps`, starting
/// on `start`.
pub fn classical_distance_series(sites: usize, start: usize, steps: usize) -> Result<ObservableSeries> {
    check_odd(sites)?;
    let mut p = ProbabilityVector::localized(sites, start)?;
    let mut d = Vec::with_capacity(steps + 1);
    let mut h = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        if t > 0 {
            p = classical_step(&p);
        }
        d.push(p.distance_to_uniform());
        h.push(p.entropy());
    }
    let meta = SeriesMetadata {
        description: format!("classical random walk d_S={sites} s0={start} T={steps}"),
        sites: Some(sites),
        seed: None,
        sample: None,
    };
    ObservableSeries::new(d, h, meta)
}

/// `−1/ln cos(π/d_S)`: decay time of the slowest mode of the odd cycle.
pub fn spectral_mixing_time(sites: usize) -> f64 {
    -1.0 / (std::f64::consts::PI / sites as f64).cos().ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMixing {
    pub sites: usize,
    pub steps: usize,
    pub fit: FitResult,
    pub spectral_tau: f64,
}

impl ClassicalMixing {
    pub fn tau(&self) -> f64 {
        self.fit.tau_mix()
    }
}

/// Mixing time from the same window policy and exponential fit the quantum
/// runs use, next to the spectral prediction.
///
/// The series runs for `⌈20·τ_spectral⌉ + 10·d_S` steps, long enough for
/// the distance to fall below the window floor.
pub fn classical_mixing_time(sites: usize) -> Result<ClassicalMixing> {
    check_odd(sites)?;
    let spectral_tau = spectral_mixing_time(sites);
    let steps = (20.0 * spectral_tau).ceil() as usize + 10 * sites;
    let series = classical_distance_series(sites, sites / 2, steps)?;
    let window = select_fit_window(&series)?;
    let fit = fit_exponential_mixing(&series, window)?;
    Ok(ClassicalMixing { sites, steps, fit, spectral_tau })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hop_on_three_sites() {
        let p = classical_step(&ProbabilityVector::localized(3, 0).unwrap());
        assert_eq!(p.as_slice(), &[0.0, 0.5, 0.5]);
        // ½(1/3 + 1/6 + 1/6)
        assert!((p.distance_to_uniform() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_is_fixed() {
        let u = ProbabilityVector::uniform(7);
        assert_eq!(classical_step(&u), u);
    }

    #[test]
    fn series_starts_at_maximal_distance() {
        let s = classical_distance_series(51, 25, 10).unwrap();
        assert!((s.d_omega()[0] - 50.0 / 51.0).abs() < 1e-15);
        assert_eq!(s.entropy()[0], 0.0);
        let s3 = classical_distance_series(3, 0, 1).unwrap();
        assert!((s3.d_omega()[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn even_ring_rejected() {
        assert!(matches!(classical_distance_series(4, 0, 3), Err(Error::Config(_))));
        assert!(classical_mixing_time(10).is_err());
    }

    #[test]
    fn spectral_time_three_sites() {
        assert!((spectral_mixing_time(3) - 1.0 / 2f64.ln()).abs() < 1e-12);
        assert!((spectral_mixing_time(3) - 1.0 / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbabilityVector::new(vec![0.25, 0.75]).is_ok());
    }
}
