use num_complex::Complex64;

use super::model::{Environment, Gate2, WalkModel, MAX_LOCAL_SITES};
use super::state::PureState;
use crate::error::{Error, Result};
use crate::linalg::{gemm, CMatrix, Layout, ZERO};

#[derive(Debug, Clone)]
enum Coupling<'a> {
    Nonlocal { e0: &'a CMatrix, e1: &'a CMatrix },
    Local { g0: Gate2, g1: Gate2 },
}

/// Applies one walk step to raw amplitude buffers without forming `U`.
///
/// Nonlocal step, per call:
/// 1. coin flip on every (site, env) pair, written straight into the column
///    of the destination site (`s−1` for coin 0, `s+1` for coin 1), giving
///    two `d_E × d_S` blocks;
/// 2. `E0` and `E1` applied to those blocks as two matrix products whose
///    output columns are the strided (site, coin) blocks of the new state.
///
/// Cost is `O(d_S·d_E²)` for the nonlocal model and `O(d_S·2^{d_S})` for the
/// local one.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    sites: usize,
    env_dim: usize,
    coin: Gate2,
    coupling: Coupling<'a>,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn nonlocal(sites: usize, coin: Gate2, e0: &'a CMatrix, e1: &'a CMatrix) -> Result<Self> {
        let env_dim = e0.nrows();
        if sites == 0 || env_dim == 0 || !e0.is_square() || e0.shape() != e1.shape() {
            return Err(Error::dimension(format!(
                "cannot step with environment matrices {:?} and {:?} on {sites} sites",
                e0.shape(),
                e1.shape()
            )));
        }
        Ok(Stepper {
            sites,
            env_dim,
            coin,
            coupling: Coupling::Nonlocal { e0, e1 },
            left: vec![ZERO; env_dim * sites],
            right: vec![ZERO; env_dim * sites],
        })
    }

    pub fn local(sites: usize, coin: Gate2, g0: Gate2, g1: Gate2) -> Result<Self> {
        if sites == 0 || sites > MAX_LOCAL_SITES {
            return Err(Error::dimension(format!(
                "local model needs 1..={MAX_LOCAL_SITES} sites, got {sites}"
            )));
        }
        Ok(Stepper {
            sites,
            env_dim: 1 << sites,
            coin,
            coupling: Coupling::Local { g0, g1 },
            left: Vec::new(),
            right: Vec::new(),
        })
    }

    pub fn for_model(model: &'a WalkModel) -> Result<Self> {
        match &model.environment {
            Environment::Nonlocal { e0, e1 } => Stepper::nonlocal(model.sites, model.coin, e0, e1),
            Environment::Local { g0, g1 } => Stepper::local(model.sites, model.coin, *g0, *g1),
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    /// Length of the amplitude buffers this stepper acts on.
    pub fn dim(&self) -> usize {
        self.sites * 2 * self.env_dim
    }

    /// `dst ← U·src`. The map is linear; `src` need not be normalized.
    pub fn apply(&mut self, src: &[Complex64], dst: &mut [Complex64]) {
        assert_eq!(src.len(), self.dim(), "source buffer has wrong length");
        assert_eq!(dst.len(), self.dim(), "destination buffer has wrong length");
        match self.coupling {
            Coupling::Nonlocal { e0, e1 } => self.apply_nonlocal(e0, e1, src, dst),
            Coupling::Local { g0, g1 } => self.apply_local(&g0, &g1, src, dst),
        }
    }

    /// Step a whole state, checking its shape.
    pub fn step(&mut self, state: &PureState) -> Result<PureState> {
        if state.sites() != self.sites || state.env_dim() != self.env_dim {
            return Err(Error::dimension(format!(
                "state has d_S={}, d_E={} but the step operator expects d_S={}, d_E={}",
                state.sites(),
                state.env_dim(),
                self.sites,
                self.env_dim
            )));
        }
        let mut out = vec![ZERO; self.dim()];
        self.apply(state.amplitudes(), &mut out);
        Ok(PureState::from_parts_unchecked(self.sites, self.env_dim, out))
    }

    fn apply_nonlocal(&mut self, e0: &CMatrix, e1: &CMatrix, src: &[Complex64], dst: &mut [Complex64]) {
        let (n, d) = (self.sites, self.env_dim);
        let f = self.coin;
        for s in 0..n {
            let to_left = (s + n - 1) % n;
            let to_right = (s + 1) % n;
            let up = &src[d * 2 * s..d * (2 * s + 1)];
            let down = &src[d * (2 * s + 1)..d * (2 * s + 2)];
            let l = &mut self.left[d * to_left..d * (to_left + 1)];
            let r = &mut self.right[d * to_right..d * (to_right + 1)];
            for e in 0..d {
                let (a0, a1) = (up[e], down[e]);
                l[e] = f[(0, 0)] * a0 + f[(0, 1)] * a1;
                r[e] = f[(1, 0)] * a0 + f[(1, 1)] * a1;
            }
        }
        let blocks = Layout { offset: 0, row_stride: 1, col_stride: 2 * d };
        gemm(d, d, n, e0.as_slice(), Layout::col_major(d), &self.left, Layout::col_major(d), dst, blocks);
        gemm(d, d, n, e1.as_slice(), Layout::col_major(d), &self.right, Layout::col_major(d), dst, blocks.at(d));
    }

    fn apply_local(&self, g0: &Gate2, g1: &Gate2, src: &[Complex64], dst: &mut [Complex64]) {
        let (n, d) = (self.sites, self.env_dim);
        let f = self.coin;
        let at = |s: usize, c: usize, e: usize| e + d * (c + 2 * s);
        for s in 0..n {
            let to_left = (s + n - 1) % n;
            let to_right = (s + 1) % n;
            let bit = 1usize << s;
            for e in (0..d).filter(|e| e & bit == 0) {
                let e1 = e | bit;
                // coin flip for qubit-s value 0 (x) and 1 (y)
                let (p0, p1) = (src[at(s, 0, e)], src[at(s, 1, e)]);
                let (q0, q1) = (src[at(s, 0, e1)], src[at(s, 1, e1)]);
                let x0 = f[(0, 0)] * p0 + f[(0, 1)] * p1;
                let x1 = f[(1, 0)] * p0 + f[(1, 1)] * p1;
                let y0 = f[(0, 0)] * q0 + f[(0, 1)] * q1;
                let y1 = f[(1, 0)] * q0 + f[(1, 1)] * q1;
                dst[at(to_left, 0, e)] = g0[(0, 0)] * x0 + g0[(0, 1)] * y0;
                dst[at(to_left, 0, e1)] = g0[(1, 0)] * x0 + g0[(1, 1)] * y0;
                dst[at(to_right, 1, e)] = g1[(0, 0)] * x1 + g1[(0, 1)] * y1;
                dst[at(to_right, 1, e1)] = g1[(1, 0)] * x1 + g1[(1, 1)] * y1;
            }
        }
    }
}

/// One step of the nonlocal model, `U = T₋⊗P₀F⊗E₀ + T₊⊗P₁F⊗E₁`.
pub fn step_nonlocal(state: &PureState, coin: &Gate2, e0: &CMatrix, e1: &CMatrix) -> Result<PureState> {
    Stepper::nonlocal(state.sites(), *coin, e0, e1)?.step(state)
}

/// One step of the local model: `G_c` acts on the environment qubit of the
/// site the walker leaves (bit `s` of the environment index).
pub fn step_local(state: &PureState, coin: &Gate2, g0: &Gate2, g1: &Gate2) -> Result<PureState> {
    let sites = state.sites();
    if sites > MAX_LOCAL_SITES || state.env_dim() != 1usize << sites {
        return Err(Error::dimension(format!(
            "local model needs d_E = 2^{sites}, state has d_E = {}",
            state.env_dim()
        )));
    }
    Stepper::local(sites, *coin, *g0, *g1)?.step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_sim::model::hadamard;
    use crate::linalg::ONE;

    fn localized(sites: usize, site: usize, env_dim: usize) -> PureState {
        let mut env = vec![ZERO; env_dim];
        env[0] = ONE;
        PureState::product(sites, site, [ONE, ZERO], &env).unwrap()
    }

    #[test]
    fn single_hadamard_step_splits_walker() {
        let one = CMatrix::identity(1, 1);
        let psi = step_nonlocal(&localized(5, 0, 1), &hadamard(), &one, &one).unwrap();
        let p = psi.site_probabilities();
        assert!((p[4] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
        assert!(psi.amplitude(4, 1, 0).norm() < 1e-15);
        assert!(psi.amplitude(1, 0, 0).norm() < 1e-15);
    }

    #[test]
    fn two_hadamard_steps() {
        // |0,0⟩ → (|−1,0⟩ + |1,1⟩)/√2 → (|−2,0⟩ + |0,1⟩ + |0,0⟩ − |2,1⟩)/2
        let one = CMatrix::identity(1, 1);
        let mut psi = localized(5, 0, 1);
        for _ in 0..2 {
            psi = step_nonlocal(&psi, &hadamard(), &one, &one).unwrap();
        }
        let p = psi.site_probabilities();
        assert!((p[3] - 0.25).abs() < 1e-15);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let e = CMatrix::identity(3, 3);
        let r = step_nonlocal(&localized(5, 0, 2), &hadamard(), &e, &e);
        assert!(matches!(r, Err(Error::Dimension(_))));
        let g = Gate2::identity();
        let r = step_local(&localized(5, 0, 8), &hadamard(), &g, &g);
        assert!(matches!(r, Err(Error::Dimension(_))));
    }

    #[test]
    fn local_step_with_identity_gates_is_bare_walk() {
        let one = CMatrix::identity(1, 1);
        let g = Gate2::identity();
        let mut bare = localized(5, 2, 1);
        let mut local = localized(5, 2, 32);
        for _ in 0..20 {
            bare = step_nonlocal(&bare, &hadamard(), &one, &one).unwrap();
            local = step_local(&local, &hadamard(), &g, &g).unwrap();
            for (a, b) in bare.site_probabilities().iter().zip(local.site_probabilities()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
