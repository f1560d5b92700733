use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{is_unitary, CMatrix, ONE, ZERO};

/// 2×2 complex matrix (coin flips and single-qubit environment gates).
pub type Gate2 = Matrix2<Complex64>;

/// Unitarity tolerance for every operator a model carries.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

/// The local model keeps one environment qubit per site; beyond this many
/// sites the `2^{d_S}`-dimensional environment is refused.
pub const MAX_LOCAL_SITES: usize = 14;

pub fn hadamard() -> Gate2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Gate2::new(h, h, h, -h)
}

/// `(|0⟩ + i|1⟩)/√2`.
pub fn plus_i_coin() -> [Complex64; 2] {
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)]
}

pub fn gate_to_matrix(g: &Gate2) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]])
}

#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    /// `E0` acts on left movers and `E1` on right movers, wherever the walker is.
    Nonlocal { e0: CMatrix, e1: CMatrix },
    /// One qubit per site; `G_c` acts on the qubit of the site being left.
    Local { g0: Gate2, g1: Gate2 },
}

impl Environment {
    pub fn env_dim(&self, sites: usize) -> usize {
        match self {
            Environment::Nonlocal { e0, .. } => e0.nrows(),
            Environment::Local { .. } => 1usize << sites.min(usize::BITS as usize - 1),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Environment::Nonlocal { .. } => "nonlocal",
            Environment::Local { .. } => "local",
        }
    }
}

/// Complete configuration of one walk.
///
/// Fields are public; [`WalkModel::validate`] is run by every operation
/// that consumes a model.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkModel {
    pub sites: usize,
    pub coin: Gate2,
    pub environment: Environment,
    pub initial_site: usize,
    pub initial_coin: [Complex64; 2],
    pub initial_env: Vec<Complex64>,
    /// Seed the environment was drawn from; carried for provenance.
    pub seed: u64,
}

impl WalkModel {
    /// Hadamard coin, walker on the middle site with coin `(|0⟩+i|1⟩)/√2`
    /// and environment in `|0⟩`.
    pub fn new(sites: usize, environment: Environment) -> Result<Self> {
        if sites == 0 {
            return Err(Error::config("site count must be positive"));
        }
        if let Environment::Local { .. } = environment {
            if sites > MAX_LOCAL_SITES {
                return Err(Error::config(format!(
                    "local environment limited to {MAX_LOCAL_SITES} sites, got {sites}"
                )));
            }
        }
        let env_dim = environment.env_dim(sites);
        let mut initial_env = vec![ZERO; env_dim];
        if let Some(first) = initial_env.first_mut() {
            *first = ONE;
        }
        let model = WalkModel {
            sites,
            coin: hadamard(),
            environment,
            initial_site: sites / 2,
            initial_coin: plus_i_coin(),
            initial_env,
            seed: 0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn nonlocal(sites: usize, e0: CMatrix, e1: CMatrix) -> Result<Self> {
        WalkModel::new(sites, Environment::Nonlocal { e0, e1 })
    }

    pub fn local(sites: usize, g0: Gate2, g1: Gate2) -> Result<Self> {
        WalkModel::new(sites, Environment::Local { g0, g1 })
    }

    /// Walk without environment (`d_E = 1`, `E0 = E1 = 1`).
    pub fn bare(sites: usize) -> Result<Self> {
        let one = CMatrix::identity(1, 1);
        WalkModel::nonlocal(sites, one.clone(), one)
    }

    pub fn with_coin(mut self, coin: Gate2) -> Self {
        self.coin = coin;
        self
    }

    pub fn with_initial_site(mut self, site: usize) -> Self {
        self.initial_site = site;
        self
    }

    pub fn with_initial_coin(mut self, coin: [Complex64; 2]) -> Self {
        self.initial_coin = coin;
        self
    }

    pub fn with_initial_env(mut self, env: Vec<Complex64>) -> Self {
        self.initial_env = env;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn env_dim(&self) -> usize {
        self.environment.env_dim(self.sites)
    }

    pub fn bath_dim(&self) -> usize {
        2 * self.env_dim()
    }

    pub fn dim(&self) -> usize {
        self.sites * self.bath_dim()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites.is_multiple_of(2) {
            return Err(Error::config(format!("site count must be odd, got {}", self.sites)));
        }
        if self.initial_site >= self.sites {
            return Err(Error::config(format!(
                "initial site {} outside ring of {} sites",
                self.initial_site, self.sites
            )));
        }
        if !is_unitary(&gate_to_matrix(&self.coin), UNITARY_TOLERANCE) {
            return Err(Error::config("coin is not unitary"));
        }
        match &self.environment {
            Environment::Nonlocal { e0, e1 } => {
                if e0.nrows() == 0 || e0.shape() != e1.shape() || !e0.is_square() {
                    return Err(Error::dimension(format!(
                        "environment matrices must be square and equal-sized, got {:?} and {:?}",
                        e0.shape(),
                        e1.shape()
                    )));
                }
                if !is_unitary(e0, UNITARY_TOLERANCE) || !is_unitary(e1, UNITARY_TOLERANCE) {
                    return Err(Error::config("environment matrices are not unitary"));
                }
            }
            Environment::Local { g0, g1 } => {
                if self.sites > MAX_LOCAL_SITES {
                    return Err(Error::config(format!(
                        "local environment limited to {MAX_LOCAL_SITES} sites, got {}",
                        self.sites
                    )));
                }
                if !is_unitary(&gate_to_matrix(g0), UNITARY_TOLERANCE)
                    || !is_unitary(&gate_to_matrix(g1), UNITARY_TOLERANCE)
                {
                    return Err(Error::config("local gates are not unitary"));
                }
            }
        }
        let coin_norm: f64 = self.initial_coin.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (coin_norm - 1.0).abs() > UNITARY_TOLERANCE {
            return Err(Error::config(format!("initial coin has norm {coin_norm}")));
        }
        if self.initial_env.len() != self.env_dim() {
            return Err(Error::config(format!(
                "initial environment has {} components, environment dimension is {}",
                self.initial_env.len(),
                self.env_dim()
            )));
        }
        let env_norm: f64 = self.initial_env.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (env_norm - 1.0).abs() > UNITARY_TOLERANCE {
            return Err(Error::config(format!("initial environment has norm {env_norm}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_ring_is_rejected() {
        assert!(matches!(WalkModel::bare(4), Err(Error::Config(_))));
    }

    #[test]
    fn local_guard() {
        let id = Gate2::identity();
        assert!(WalkModel::local(13, id, id).is_ok());
        assert!(matches!(WalkModel::local(15, id, id), Err(Error::Config(_))));
        assert_eq!(WalkModel::local(5, id, id).unwrap().env_dim(), 32);
    }

    #[test]
    fn non_unitary_operators_are_rejected() {
        let bad = CMatrix::from_element(2, 2, ONE);
        let id = CMatrix::identity(2, 2);
        assert!(WalkModel::nonlocal(3, bad, id.clone()).is_err());
        let m = WalkModel::nonlocal(3, id.clone(), id).unwrap();
        assert!(m.clone().with_coin(Gate2::from_element(ONE)).validate().is_err());
        let skewed = [ONE, ONE];
        assert!(m.with_initial_coin(skewed).validate().is_err());
    }

    #[test]
    fn mismatched_environment_shapes() {
        let r = WalkModel::nonlocal(3, CMatrix::identity(2, 2), CMatrix::identity(3, 3));
        assert!(matches!(r, Err(Error::Dimension(_))));
    }
}
