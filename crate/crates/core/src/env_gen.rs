//! Environment operators: random Hermitian exponentials for the nonlocal
//! model, parametrized qubit rotations for the local one, and their
//! noncommutativity.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::core_sim::{gate_to_matrix, Gate2};
use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, hermiticity_deviation, matmul, CMatrix, NormKind};
use crate::rng::symmetric_f64;

/// Default half-width of the sampling box for Hamiltonian entries.
pub const DEFAULT_SPREAD: f64 = 1.0;

const HERMITIAN_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let dev = hermiticity_deviation(&m);
        if !(dev <= HERMITIAN_TOLERANCE) {
            return Err(Error::domain(format!("matrix is not Hermitian (deviation {dev:e})")));
        }
        Ok(HermitianMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// Rotation angles of a local environment gate, kept in `θ ∈ [0, π]`,
/// `φ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateAngles {
    theta: f64,
    phi: f64,
}

impl GateAngles {
    /// Canonicalizes without changing the gate: `θ` is reduced mod `2π`, and a
    /// negative `θ` is traded for `(−θ, φ + π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::domain(format!("gate angles must be finite, got θ={theta}, φ={phi}")));
        }
        let mut theta = theta.rem_euclid(TAU);
        let mut phi = phi;
        if theta > PI {
            theta -= TAU;
        }
        if theta < 0.0 {
            theta = -theta;
            phi += PI;
        }
        let phi = phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU
        let phi = if phi >= TAU { 0.0 } else { phi };
        Ok(GateAngles { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Hermitian matrix with entries drawn uniformly from the box of half-width
/// `spread` around zero.
///
/// Entries are drawn row by row over the upper triangle: a diagonal entry
/// takes one draw (real), an off-diagonal entry takes two (real part, then
/// imaginary part). The lower triangle is the conjugate mirror.
pub fn sample_hermitian<R: RngCore + ?Sized>(dim: usize, spread: f64, rng: &mut R) -> Result<HermitianMatrix> {
    if dim == 0 {
        return Err(Error::domain("Hermitian dimension must be at least 1"));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(Error::domain(format!("spread must be positive, got {spread}")));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(symmetric_f64(rng, spread), 0.0);
        for j in i + 1..dim {
            let re = symmetric_f64(rng, spread);
            let im = symmetric_f64(rng, spread);
            m[(i, j)] = Complex64::new(re, im);
            m[(j, i)] = Complex64::new(re, -im);
        }
    }
    Ok(HermitianMatrix(m))
}

/// `exp(−iH) = V·diag(e^{−iλ})·V†` from the eigendecomposition of `H`.
pub fn exponentiate_hermitian(h: &HermitianMatrix) -> Result<CMatrix> {
    let eig = hermitian_eigen(h.as_matrix())?;
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda);
        for z in scaled.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    Ok(matmul(&scaled, &v.adjoint()))
}

/// `G = [[cos θ, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ]]`.
pub fn make_local_gate(angles: GateAngles) -> Gate2 {
    let (s, c) = angles.theta.sin_cos();
    let phase = Complex64::from_polar(1.0, angles.phi);
    Gate2::new(
        Complex64::new(c, 0.0),
        -phase.conj() * s,
        phase * s,
        Complex64::new(c, 0.0),
    )
}

/// `γ = ‖AB − BA‖`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix, kind: NormKind) -> Result<f64> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::dimension(format!(
            "commutator needs equal square matrices, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let comm = matmul(a, b) - matmul(b, a);
    Ok(linalg::norm(&comm, kind))
}

pub fn gate_commutator_norm(g0: &Gate2, g1: &Gate2, kind: NormKind) -> f64 {
    let comm = g0 * g1 - g1 * g0;
    linalg::norm(&gate_to_matrix(&comm), kind)
}

/// The pair `(E0, E1)` of one quench sample: `H0` then `H1` drawn from `rng`.
pub fn sample_environment<R: RngCore + ?Sized>(dim: usize, spread: f64, rng: &mut R) -> Result<(CMatrix, CMatrix)> {
    let h0 = sample_hermitian(dim, spread, rng)?;
    let h1 = sample_hermitian(dim, spread, rng)?;
    Ok((exponentiate_hermitian(&h0)?, exponentiate_hermitian(&h1)?))
}
