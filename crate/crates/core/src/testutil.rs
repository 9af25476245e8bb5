//! Shared helpers for unit and integration tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::field::{coherence_from_mixture, CoherenceMatrix, MixtureSpec, ModeBasis};
use crate::linalg;

/// Random trace-1 PSD matrix (normalized Ginibre product).
pub(crate) fn random_psd(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let m = &g * g.adjoint();
    let t = linalg::trace_re(&m);
    m * Complex64::new(1.0 / t, 0.0)
}

/// Random unitary (QR of a Ginibre matrix).
pub(crate) fn random_unitary(d: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    g.qr().q()
}

/// The partially coherent vortex state used throughout: the coherent
/// superposition V−3 − (i/2)V−6 mixed incoherently with V3 at weight 1/2,
/// expanded over charges ℓ ∈ {−9,−6,−3,0,3,6,9}.
pub(crate) fn eq5_state(basis: &ModeBasis) -> CoherenceMatrix {
    let zero = Complex64::new(0.0, 0.0);
    let mut ket1 = DVector::from_element(7, zero);
    ket1[2] = Complex64::new(1.0, 0.0); // V−3
    ket1[1] = Complex64::new(0.0, -0.5); // −(i/2) V−6
    let mut ket2 = DVector::from_element(7, zero);
    ket2[4] = Complex64::new(1.0, 0.0); // V3
    coherence_from_mixture(&MixtureSpec::new(vec![(1.0, ket1), (0.5, ket2)]), basis).unwrap()
}
