//! Reduced density matrices and the scalar diagnostics computed from them.

use num_complex::Complex64;

use crate::core_sim::{PureState, Stepper, WalkModel};
use crate::error::{Error, Result};
use crate::linalg::{gemm, hermitian_eigenvalues, hermiticity_deviation, matmul, CMatrix, Layout, ZERO};

/// Eigenvalues above `-CLAMP_TOLERANCE` are rounding noise and get clamped to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below `-NEGATIVITY_LIMIT` mean the input is not a state.
pub const NEGATIVITY_LIMIT: f64 = 1e-8;
const DENSITY_TOLERANCE: f64 = 1e-10;
const COMPLETENESS_TOLERANCE: f64 = 1e-8;

/// Largest walker dimension `d_S·2·d_E` for which Kraus operators are extracted.
pub const MAX_KRAUS_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity, each to 1e-10.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::dimension(format!("density matrix must be square, got {:?}", m.shape())));
        }
        let herm = hermiticity_deviation(&m);
        if herm > DENSITY_TOLERANCE {
            return Err(Error::domain(format!("density matrix not Hermitian (deviation {herm:e})")));
        }
        let trace = m.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOLERANCE {
            return Err(Error::domain(format!("density matrix trace is {trace}")));
        }
        let min = hermitian_eigenvalues(&m).first().copied().unwrap_or(0.0);
        if min < -DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity { min_eigenvalue: min });
        }
        Ok(DensityMatrix(m))
    }

    /// `ω = I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0))
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        DensityMatrix::new(&v * v.adjoint())
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let d = nalgebra::DVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| Complex64::new(p, 0.0)),
        );
        DensityMatrix::new(CMatrix::from_diagonal(&d))
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

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }
}

/// Kraus operators of the map induced on walker ⊗ coin, indexed by the
/// environment basis state they project onto.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
}

impl KrausSet {
    /// Checks shapes and `Σ X†X = I` to 1e-8.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::domain("a Kraus set needs at least one operator"));
        };
        let shape = first.shape();
        if shape.0 != shape.1 || operators.iter().any(|x| x.shape() != shape) {
            return Err(Error::dimension("Kraus operators must be square and equally sized"));
        }
        let set = KrausSet { operators };
        let dev = set.completeness_deviation();
        if !(dev <= COMPLETENESS_TOLERANCE) {
            return Err(Error::Numerical(format!("Kraus completeness violated by {dev:e}")));
        }
        Ok(set)
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// Spectral norm of `Σ X†X − I`.
    pub fn completeness_deviation(&self) -> f64 {
        let n = self.operators[0].nrows();
        let mut sum = CMatrix::zeros(n, n);
        for x in &self.operators {
            sum += matmul(&x.adjoint(), x);
        }
        let dev = sum - CMatrix::identity(n, n);
        crate::linalg::spectral_norm(&dev)
    }
}

/// `M·M†` for a row-major `rows × cols` block of amplitudes.
fn row_gram(data: &[Complex64], rows: usize, cols: usize) -> CMatrix {
    let conj: Vec<Complex64> = data.iter().map(|z| z.conj()).collect();
    let mut out = CMatrix::zeros(rows, rows);
    gemm(
        rows,
        cols,
        rows,
        data,
        Layout::row_major(cols),
        &conj,
        Layout::col_major(cols),
        out.as_mut_slice(),
        Layout::col_major(rows),
    );
    out
}

/// `M†·M` for the same block, a `cols × cols` matrix with the same nonzero
/// spectrum as [`row_gram`].
fn column_gram(data: &[Complex64], rows: usize, cols: usize) -> CMatrix {
    let conj: Vec<Complex64> = data.iter().map(|z| z.conj()).collect();
    let mut out = CMatrix::zeros(cols, cols);
    // (M†)_{ij} = conj(M_{ji}): conj buffer read column-major with leading dim `cols`
    gemm(
        cols,
        rows,
        cols,
        &conj,
        Layout::col_major(cols),
        data,
        Layout::row_major(cols),
        out.as_mut_slice(),
        Layout::col_major(cols),
    );
    out
}

/// `ρ_S = Tr_CE |Ψ⟩⟨Ψ|`, a `d_S × d_S` matrix.
pub fn reduce_to_position(state: &PureState) -> DensityMatrix {
    DensityMatrix(row_gram(state.amplitudes(), state.sites(), state.bath_dim()))
}

/// `ρ_SC = Tr_E |Ψ⟩⟨Ψ|`, indexed by `c + 2·s`.
pub fn reduce_to_position_coin(state: &PureState) -> DensityMatrix {
    DensityMatrix(row_gram(state.amplitudes(), 2 * state.sites(), state.env_dim()))
}

/// Eigenvalues of `ρ_S`, ascending, with `d_S` entries.
///
/// When the bath is smaller than the ring the `d_B × d_B` Gram matrix is
/// diagonalized instead and padded with zeros.
pub fn position_spectrum(state: &PureState) -> Vec<f64> {
    let (rows, cols) = (state.sites(), state.bath_dim());
    if cols < rows {
        let mut vals = hermitian_eigenvalues(&column_gram(state.amplitudes(), rows, cols));
        vals.resize(rows, 0.0);
        vals.sort_by(f64::total_cmp);
        vals
    } else {
        hermitian_eigenvalues(&row_gram(state.amplitudes(), rows, cols))
    }
}

fn check_same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dimension(format!(
            "density matrices have dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `½ Σ|μ_k|` over the eigenvalues of `ρ₁ − ρ₂`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho1, rho2)?;
    // |eig(A − B)| = |eig(B − A)| exactly, but the solver rounds the two
    // differently; a fixed operand order makes the result exactly symmetric.
    let (a, b) = if entrywise_le(rho1, rho2) { (rho1, rho2) } else { (rho2, rho1) };
    let diff = &a.0 - &b.0;
    let d = 0.5 * hermitian_eigenvalues(&diff).iter().map(|m| m.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

fn entrywise_le(a: &DensityMatrix, b: &DensityMatrix) -> bool {
    for (x, y) in a.0.iter().zip(b.0.iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            std::cmp::Ordering::Equal => continue,
            o => return o == std::cmp::Ordering::Less,
        }
    }
    true
}

/// Trace distance to `ω = I/d` from the spectrum of `ρ`.
pub fn distance_to_uniform_from_spectrum(eigenvalues: &[f64]) -> f64 {
    let u = 1.0 / eigenvalues.len() as f64;
    (0.5 * eigenvalues.iter().map(|l| (l - u).abs()).sum::<f64>()).clamp(0.0, 1.0)
}

/// `D_ω = D(ρ, I/d)`. Since `ω` commutes with everything, this only needs
/// the eigenvalues of `ρ`.
pub fn distance_to_uniform(rho: &DensityMatrix) -> f64 {
    distance_to_uniform_from_spectrum(&rho.eigenvalues())
}

/// `−Σ λ ln λ` in nats with `0·ln 0 = 0`.
pub fn entropy_from_spectrum(eigenvalues: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for &l in eigenvalues {
        if l < -NEGATIVITY_LIMIT {
            return Err(Error::InvalidDensity { min_eigenvalue: l });
        }
        let l = l.clamp(0.0, 1.0);
        if l > 0.0 {
            h -= l * l.ln();
        }
    }
    Ok(h.max(0.0))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_from_spectrum(&rho.eigenvalues())
}

/// `(D_ω, H)` of the position marginal of a walk state, from one
/// diagonalization.
pub fn position_diagnostics(state: &PureState) -> Result<(f64, f64)> {
    let spectrum = position_spectrum(state);
    Ok((distance_to_uniform_from_spectrum(&spectrum), entropy_from_spectrum(&spectrum)?))
}

/// `X_e = (I_SC ⊗ ⟨e|) Uᵗ (I_SC ⊗ |ε₀⟩)`, built one column at a time by
/// stepping each basis state `|s, c⟩|ε₀⟩` forward `t` times.
pub fn kraus_generators(model: &WalkModel, t: usize) -> Result<KrausSet> {
    model.validate()?;
    let dim = model.dim();
    if dim > MAX_KRAUS_DIM {
        return Err(Error::Size { what: "d_S·2·d_E", actual: dim, limit: MAX_KRAUS_DIM });
    }
    let env_dim = model.env_dim();
    let sc = 2 * model.sites;
    let mut stepper = Stepper::for_model(model)?;
    let mut operators = vec![CMatrix::zeros(sc, sc); env_dim];
    let mut cur = vec![ZERO; dim];
    let mut next = vec![ZERO; dim];
    for col in 0..sc {
        cur.iter_mut().for_each(|z| *z = ZERO);
        cur[env_dim * col..env_dim * (col + 1)].copy_from_slice(&model.initial_env);
        for _ in 0..t {
            stepper.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        for row in 0..sc {
            for (e, x) in operators.iter_mut().enumerate() {
                x[(row, col)] = cur[e + env_dim * row];
            }
        }
    }
    KrausSet::new(operators)
}

/// `Σ_e X_e ρ X_e†`.
pub fn apply_cp_map(kraus: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if kraus.dim() != rho.dim() {
        return Err(Error::dimension(format!(
            "Kraus operators act on dimension {}, density matrix has {}",
            kraus.dim(),
            rho.dim()
        )));
    }
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for x in kraus.operators() {
        out += matmul(&matmul(x, &rho.0), &x.adjoint());
    }
    Ok(DensityMatrix(out))
}

/// Average entanglement entropy of a random pure state on `d_S ⊗ d_B`:
/// `Σ_{k=d_B+1}^{d_S·d_B} 1/k − (d_S − 1)/(2 d_B)`.
pub fn page_entropy(sites: usize, bath: usize) -> Result<f64> {
    if sites == 0 || sites > bath {
        return Err(Error::domain(format!("page entropy needs 1 <= d_S <= d_B, got d_S={sites}, d_B={bath}")));
    }
    // smallest terms first
    let harmonic: f64 = (bath + 1..=sites * bath).rev().map(|k| 1.0 / k as f64).sum();
    Ok(harmonic - (sites - 1) as f64 / (2.0 * bath as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn basis(n: usize, k: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; n];
        v[k] = ONE;
        v
    }

    #[test]
    fn product_state_reduces_to_projector() {
        let state = PureState::product(5, 3, [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)], &basis(3, 1)).unwrap();
        let rho = reduce_to_position(&state);
        let expect = DensityMatrix::pure(&basis(5, 3)).unwrap();
        assert!((rho.as_matrix() - expect.as_matrix()).norm() < 1e-15);
        assert!(DensityMatrix::new(rho.into_matrix()).is_ok());
    }

    #[test]
    fn entangled_pair_reduces_to_half_identity() {
        // (|0⟩|c=0,e=0⟩ + |1⟩|c=1,e=0⟩)/√2 on a 3-site ring with d_E = 1
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let mut amps = vec![ZERO; 6];
        amps[0] = h;
        amps[3] = h;
        let state = PureState::new(3, 1, amps).unwrap();
        let rho = reduce_to_position(&state);
        assert!((rho.as_matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((rho.as_matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(rho.as_matrix()[(0, 1)].norm() < 1e-15);
        assert!((von_neumann_entropy(&rho).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn small_bath_spectrum_matches_full_reduction() {
        let model = WalkModel::bare(9).unwrap();
        let state = crate::core_sim::evolve(&model, 7, |_, _| Ok(())).unwrap();
        let fast = position_spectrum(&state);
        let full = reduce_to_position(&state).eigenvalues();
        assert_eq!(fast.len(), 9);
        for (a, b) in fast.iter().zip(&full) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let r0 = DensityMatrix::pure(&basis(2, 0)).unwrap();
        let r1 = DensityMatrix::pure(&basis(2, 1)).unwrap();
        assert_eq!(trace_distance(&r0, &r0).unwrap(), 0.0);
        assert!((trace_distance(&r0, &r1).unwrap() - 1.0).abs() < 1e-15);

        let loc = DensityMatrix::pure(&basis(51, 20)).unwrap();
        let omega = DensityMatrix::maximally_mixed(51);
        assert!((trace_distance(&loc, &omega).unwrap() - 50.0 / 51.0).abs() < 1e-12);
        assert!((distance_to_uniform(&loc) - 50.0 / 51.0).abs() < 1e-12);
        assert!(distance_to_uniform(&omega) < 1e-15);

        assert!(matches!(trace_distance(&r0, &omega), Err(Error::Dimension(_))));
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&DensityMatrix::pure(&basis(4, 2)).unwrap()).unwrap().abs() < 1e-12);
        let h = von_neumann_entropy(&DensityMatrix::maximally_mixed(51)).unwrap();
        assert!((h - 51f64.ln()).abs() < 1e-12);
        assert!((h - 3.9318).abs() < 1e-4);
        let half = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        assert!((von_neumann_entropy(&half).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn entropy_clamps_rounding_noise_and_rejects_negativity() {
        assert!(entropy_from_spectrum(&[1.0, -5e-11]).unwrap().abs() < 1e-15);
        assert!(entropy_from_spectrum(&[1.0 + 1e-9, -1e-9]).is_ok());
        assert!(matches!(
            entropy_from_spectrum(&[1.1, -0.1]),
            Err(Error::InvalidDensity { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let not_unit = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.5, 0.0),
        ]));
        assert!(matches!(DensityMatrix::new(negative), Err(Error::InvalidDensity { .. })));
    }

    #[test]
    fn page_entropy_examples() {
        assert_eq!(page_entropy(1, 7).unwrap(), 0.0);
        assert!((page_entropy(2, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(page_entropy(5, 4), Err(Error::Domain(_))));
        assert!(page_entropy(0, 4).is_err());
    }

    #[test]
    fn page_entropy_large_bath_approaches_log_sites() {
        let h = page_entropy(51, 1_000_000).unwrap();
        assert!((h - 51f64.ln()).abs() < 1e-3, "{h}");
    }

    #[test]
    fn trivial_environment_kraus_is_unitary() {
        let model = WalkModel::bare(5).unwrap();
        let k = kraus_generators(&model, 6).unwrap();
        assert_eq!(k.operators().len(), 1);
        let x = &k.operators()[0];
        assert!((x.adjoint() * x - CMatrix::identity(10, 10)).norm() < 1e-13);
    }

    #[test]
    fn zero_step_kraus_is_scaled_identity() {
        let mut env = vec![ZERO; 3];
        env[0] = Complex64::new(0.6, 0.0);
        env[2] = Complex64::new(0.0, 0.8);
        let e = CMatrix::identity(3, 3);
        let model = WalkModel::nonlocal(3, e.clone(), e).unwrap().with_initial_env(env.clone());
        let k = kraus_generators(&model, 0).unwrap();
        for (x, amp) in k.operators().iter().zip(env) {
            assert!((x - CMatrix::identity(6, 6) * amp).norm() < 1e-15);
        }
    }

    #[test]
    fn kraus_guard() {
        let e = CMatrix::identity(64, 64);
        let model = WalkModel::nonlocal(33, e.clone(), e).unwrap();
        assert!(matches!(kraus_generators(&model, 1), Err(Error::Size { .. })));
    }

    #[test]
    fn identity_channel() {
        let k = KrausSet::new(vec![CMatrix::identity(3, 3)]).unwrap();
        let rho = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(apply_cp_map(&k, &rho).unwrap(), rho);
        let wrong = DensityMatrix::maximally_mixed(2);
        assert!(matches!(apply_cp_map(&k, &wrong), Err(Error::Dimension(_))));
        assert!(KrausSet::new(vec![CMatrix::identity(3, 3) * Complex64::new(0.5, 0.0)]).is_err());
    }
}
