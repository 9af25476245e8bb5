//! Small Hermitian-matrix helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eig(m: &DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let sym = nalgebra::SymmetricEigen::new(m.clone());
    // nalgebra does not guarantee an ordering; sort ascending for stable
    // downstream use.
    let n = sym.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[a].total_cmp(&sym.eigenvalues[b]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| sym.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        vecs.set_column(new_col, &sym.eigenvectors.column(old_col));
    }
    (vals, vecs)
}

/// Apply `f` to the eigenvalues of a Hermitian matrix: V f(Λ) V†.
pub(crate) fn hermitian_map(
    m: &DMatrix<Complex64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<Complex64> {
    let (vals, vecs) = hermitian_eig(m);
    let d = vals.len();
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(f(vals[i]), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &vecs * diag * vecs.adjoint()
}

/// Force exact Hermiticity: (M + M†)/2.
pub(crate) fn hermitize(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest |entry| of a complex matrix.
pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max elementwise deviation from Hermiticity.
pub(crate) fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Real trace of a Hermitian matrix.
pub(crate) fn trace_re(m: &DMatrix<Complex64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}
