//! Time series of the walk diagnostics and the quantities extracted from
//! them: mixing time, long-time averages, power-law saturation and quench
//! averages.

mod fit;
mod quench;

pub use fit::{
    default_t0, fit_exponential_mixing, fit_power_law, long_time_average, relaxation_window,
    select_fit_window,
    window_bounds, LinearFit, MIN_SERIES_LEN, MIN_WINDOW, PLATEAU_FLOOR,
};
pub use quench::{aggregate, quench_average, record_series, EnvTemplate, QuenchResult, QuenchTemplate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetadata {
    pub description: String,
    /// Ring size; the window policy skips the first `⌈d_S/2⌉` steps.
    pub sites: Option<usize>,
    pub seed: Option<u64>,
    pub sample: Option<u64>,
}

/// `D_ω(t)` and `H(t)` for `t = 0, 1, …, T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    d_omega: Vec<f64>,
    entropy: Vec<f64>,
    pub metadata: SeriesMetadata,
}

impl ObservableSeries {
    pub fn new(d_omega: Vec<f64>, entropy: Vec<f64>, metadata: SeriesMetadata) -> Result<Self> {
        if d_omega.len() != entropy.len() {
            return Err(Error::dimension(format!(
                "series columns differ in length: {} vs {}",
                d_omega.len(),
                entropy.len()
            )));
        }
        if d_omega.is_empty() {
            return Err(Error::domain("series must contain t = 0"));
        }
        Ok(ObservableSeries { d_omega, entropy, metadata })
    }

    /// Series with a zero entropy column, for synthetic inputs.
    pub fn from_distances(d_omega: Vec<f64>) -> Result<Self> {
        let entropy = vec![0.0; d_omega.len()];
        ObservableSeries::new(d_omega, entropy, SeriesMetadata::default())
    }

    pub fn len(&self) -> usize {
        self.d_omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d_omega.is_empty()
    }

    /// Last time step `T`.
    pub fn final_time(&self) -> usize {
        self.d_omega.len() - 1
    }

    pub fn times(&self) -> impl Iterator<Item = usize> {
        0..self.d_omega.len()
    }

    pub fn d_omega(&self) -> &[f64] {
        &self.d_omega
    }

    pub fn entropy(&self) -> &[f64] {
        &self.entropy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

/// Data a fit was made on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSupport {
    /// Inclusive time window `t1..=t2`.
    Window { t1: usize, t2: usize },
    Points { count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: Vec<FitParameter>,
    pub support: FitSupport,
    /// RMS residual of the linear fit in log space.
    pub residual_rms: f64,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&FitParameter> {
        self.params.iter().find(|p| p.name == name)
    }

    fn value(&self, name: &str) -> f64 {
        self.param(name).map_or(f64::NAN, |p| p.value)
    }

    pub fn tau_mix(&self) -> f64 {
        self.value("tau_mix")
    }

    pub fn prefactor(&self) -> f64 {
        self.value("C")
    }

    pub fn exponent(&self) -> f64 {
        self.value("x")
    }

    pub fn window(&self) -> Option<(usize, usize)> {
        match self.support {
            FitSupport::Window { t1, t2 } => Some((t1, t2)),
            FitSupport::Points { .. } => None,
        }
    }
}
