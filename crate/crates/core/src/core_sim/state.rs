use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ZERO;

/// Tolerance on `|‖ψ‖ − 1|` accepted when a state is constructed.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Layout tag written into snapshots.
pub const LAYOUT: &str = "e+d_E*(c+2s)";

/// Wavefunction over (site, coin, environment).
///
/// Amplitude `ψ_{s c e}` lives at flat index `e + d_E·(c + 2·s)`, so the
/// environment block for a fixed (site, coin) pair is contiguous and each row
/// of the site-by-bath matrix is contiguous as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    sites: usize,
    env_dim: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(sites: usize, env_dim: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if sites == 0 || env_dim == 0 {
            return Err(Error::dimension("site count and environment dimension must be positive"));
        }
        let expected = sites * 2 * env_dim;
        if amplitudes.len() != expected {
            return Err(Error::dimension(format!(
                "expected {expected} amplitudes for d_S={sites}, d_E={env_dim}, got {}",
                amplitudes.len()
            )));
        }
        let state = PureState { sites, env_dim, amplitudes };
        let norm = state.norm();
        if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
            return Err(Error::config(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(sites: usize, env_dim: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), sites * 2 * env_dim);
        PureState { sites, env_dim, amplitudes }
    }

    /// `|site⟩ ⊗ |coin⟩ ⊗ |env⟩`.
    pub fn product(sites: usize, site: usize, coin: [Complex64; 2], env: &[Complex64]) -> Result<Self> {
        if site >= sites {
            return Err(Error::config(format!("initial site {site} outside ring of {sites} sites")));
        }
        let env_dim = env.len();
        let mut amplitudes = vec![ZERO; sites * 2 * env_dim];
        for (c, &a) in coin.iter().enumerate() {
            for (e, &b) in env.iter().enumerate() {
                amplitudes[e + env_dim * (c + 2 * site)] = a * b;
            }
        }
        PureState::new(sites, env_dim, amplitudes)
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.sites
    }

    #[inline]
    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    /// Coin ⊗ environment dimension, `2·d_E`.
    #[inline]
    pub fn bath_dim(&self) -> usize {
        2 * self.env_dim
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn index(&self, site: usize, coin: usize, env: usize) -> usize {
        env + self.env_dim * (coin + 2 * site)
    }

    pub fn amplitude(&self, site: usize, coin: usize, env: usize) -> Complex64 {
        self.amplitudes[self.index(site, coin, env)]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Diagonal of the position density matrix.
    pub fn site_probabilities(&self) -> Vec<f64> {
        self.amplitudes
            .chunks_exact(self.bath_dim())
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_product_state() {
        let s = PureState::product(3, 0, [c(1.0, 0.0), ZERO], &[c(1.0, 0.0)]).unwrap();
        assert_eq!(s.dim(), 6);
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|z| *z == ZERO));
    }

    #[test]
    fn plus_i_coin_on_site_25() {
        let h = FRAC_1_SQRT_2;
        let s = PureState::product(51, 25, [c(h, 0.0), c(0.0, h)], &[c(1.0, 0.0)]).unwrap();
        let nonzero: Vec<(usize, Complex64)> = s
            .amplitudes()
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, z)| *z != ZERO)
            .collect();
        assert_eq!(nonzero, vec![(s.index(25, 0, 0), c(h, 0.0)), (s.index(25, 1, 0), c(0.0, h))]);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_length_and_norm() {
        assert!(matches!(PureState::new(3, 1, vec![ZERO; 5]), Err(Error::Dimension(_))));
        assert!(matches!(PureState::new(3, 1, vec![ZERO; 6]), Err(Error::Config(_))));
    }
}
