//! Dense complex linear algebra shared by the simulator and the diagnostics.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Matrix norm used for commutators and unitarity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    /// Largest singular value.
    #[default]
    Spectral,
    Frobenius,
}

pub fn norm(m: &CMatrix, kind: NormKind) -> f64 {
    match kind {
        NormKind::Spectral => spectral_norm(m),
        NormKind::Frobenius => m.norm(),
    }
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// `‖U†U − I‖` in the spectral norm.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    let gram = u.adjoint() * u - CMatrix::identity(n, n);
    spectral_norm(&gram)
}

/// Dense product through [`gemm`]; much faster than the generic nalgebra
/// product for complex matrices of a few hundred rows.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul: inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = CMatrix::zeros(m, n);
    gemm(
        m,
        k,
        n,
        a.as_slice(),
        Layout::col_major(m),
        b.as_slice(),
        Layout::col_major(k),
        out.as_mut_slice(),
        Layout::col_major(m),
    );
    out
}

/// True when `‖U†U − I‖₂ ≤ tol`.
///
/// The Frobenius norm bounds the spectral norm from above, so the SVD is only
/// needed when the cheap bound is inconclusive.
pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    if !u.is_square() {
        return false;
    }
    let n = u.nrows();
    let mut gram = matmul(&u.adjoint(), u);
    for i in 0..n {
        gram[(i, i)] -= ONE;
    }
    if !gram.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return false;
    }
    gram.norm() <= tol || spectral_norm(&gram) <= tol
}

/// Largest entrywise deviation `|M_ij − conj(M_ji)|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
    let n = m.nrows();
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 1000 * n.max(1)).ok_or_else(|| {
        Error::Numerical(format!(
            "Hermitian eigendecomposition did not converge (dim {n}, max |entry| {scale:e}, \
             hermiticity deviation {:e})",
            hermiticity_deviation(m)
        ))
    })
}

/// Offset and strides of a matrix view into flat complex storage.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub offset: usize,
    pub row_stride: usize,
    pub col_stride: usize,
}

impl Layout {
    pub const fn col_major(rows: usize) -> Self {
        Layout { offset: 0, row_stride: 1, col_stride: rows }
    }

    pub const fn row_major(cols: usize) -> Self {
        Layout { offset: 0, row_stride: cols, col_stride: 1 }
    }

    pub const fn at(self, offset: usize) -> Self {
        Layout { offset, ..self }
    }

    fn last_index(&self, rows: usize, cols: usize) -> usize {
        if rows == 0 || cols == 0 {
            return self.offset;
        }
        self.offset + (rows - 1) * self.row_stride + (cols - 1) * self.col_stride
    }
}

/// `c ← a·b` for an `m×k` times `k×n` product over arbitrarily strided slices.
///
/// Panics if any view reaches past the end of its slice.
#[allow(clippy::too_many_arguments)]
pub fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[Complex64],
    la: Layout,
    b: &[Complex64],
    lb: Layout,
    c: &mut [Complex64],
    lc: Layout,
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(k == 0 || la.last_index(m, k) < a.len(), "gemm: lhs view out of bounds");
    assert!(k == 0 || lb.last_index(k, n) < b.len(), "gemm: rhs view out of bounds");
    assert!(lc.last_index(m, n) < c.len(), "gemm: output view out of bounds");
    // SAFETY: Complex64 is #[repr(C)] { re, im } and has the layout of [f64; 2].
    // Every element touched lies inside the slices (checked above), and `c`
    // is borrowed mutably so it cannot alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr().add(la.offset).cast(),
            la.row_stride as isize,
            la.col_stride as isize,
            b.as_ptr().add(lb.offset).cast(),
            lb.row_stride as isize,
            lb.col_stride as isize,
            [0.0, 0.0],
            c.as_mut_ptr().add(lc.offset).cast(),
            lc.row_stride as isize,
            lc.col_stride as isize,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gemm_matches_nalgebra_product() {
        let a = CMatrix::from_fn(3, 4, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = CMatrix::from_fn(4, 2, |i, j| c((i * j) as f64, 1.0 - i as f64));
        let mut out = vec![ZERO; 6];
        gemm(
            3,
            4,
            2,
            a.as_slice(),
            Layout::col_major(3),
            b.as_slice(),
            Layout::col_major(4),
            &mut out,
            Layout::col_major(3),
        );
        let expect = &a * &b;
        for (x, y) in out.iter().zip(expect.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn gemm_writes_only_into_strided_columns() {
        let a = CMatrix::identity(2, 2);
        let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let mut out = vec![c(-7.0, 0.0); 8];
        // output columns every 4 elements starting at 2
        gemm(
            2,
            2,
            2,
            a.as_slice(),
            Layout::col_major(2),
            &b,
            Layout::col_major(2),
            &mut out,
            Layout { offset: 2, row_stride: 1, col_stride: 4 },
        );
        let re: Vec<f64> = out.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![-7.0, -7.0, 1.0, 2.0, -7.0, -7.0, 3.0, 4.0]);
    }

    #[test]
    #[should_panic(expected = "out of bounds")]
    fn gemm_rejects_short_output() {
        let a = CMatrix::identity(2, 2);
        let mut out = vec![ZERO; 3];
        gemm(2, 2, 2, a.as_slice(), Layout::col_major(2), a.as_slice(), Layout::col_major(2), &mut out, Layout::col_major(2));
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, -2.0), c(1.0, 0.0)]));
        assert!((spectral_norm(&m) - 2.0).abs() < 1e-12);
        assert!((norm(&m, NormKind::Frobenius) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }
}
