//! Mode bases, coherence matrices and the scalar metrics built on them.
//!
//! The signal is expanded over a finite set of spatially unbounded modes
//! ψ_k; its second-order statistics are the d×d Hermitian PSD coherence
//! matrix ρ. The mutual coherence function is G(x′,x″) = Σ ψ_m(x′) ρ_mn
//! ψ_n*(x″) and the transverse intensity its diagonal I(x) = G(x,x).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg;

/// Hermiticity tolerance accepted at construction (relative to the largest
/// matrix entry, with a floor of 1 for near-zero matrices).
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalue floor for the PSD check, relative to the trace.
pub const PSD_EIG_FLOOR: f64 = -1e-10;

/// Transverse coordinate or transverse momentum, in mm or rad/mm.
///
/// One-dimensional setups put everything on the x axis and keep y = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// 1D point on the x axis.
    pub fn x_only(x: f64) -> Self {
        Vec2 { x, y: 0.0 }
    }

    pub fn dot(&self, other: &Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn sub(&self, other: &Vec2) -> Vec2 {
        Vec2::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(&self, other: &Vec2) -> Vec2 {
        Vec2::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(&self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Number of transverse dimensions the model runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

/// Family of computational modes.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    /// Discrete plane waves ψ_k(x) = exp(−i p_k·x), labelled by transverse
    /// momenta p_k (rad/mm).
    PlaneWave { momenta: Vec<Vec2>, dim: Dim },
    /// Vortex modes V_ℓ(r,φ) = R_ℓ(r) e^{iℓφ} with a Laguerre-Gauss
    /// (p = 0) radial envelope of waist `waist` (mm), unit L² norm.
    Vortex { charges: Vec<i32>, waist: f64 },
}

/// A set of d evaluable transverse modes plus the optical wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    kind: BasisKind,
    /// Wavelength in mm.
    wavelength: f64,
}

impl ModeBasis {
    /// Build a basis, validating d ≥ 2, distinct mode labels and positive
    /// scale parameters.
    pub fn new(kind: BasisKind, wavelength: f64) -> Result<Self> {
        if wavelength <= 0.0 || !wavelength.is_finite() {
            return Err(Error::Argument(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        match &kind {
            BasisKind::PlaneWave { momenta, .. } => {
                if momenta.len() < 2 {
                    return Err(Error::Dimension(format!(
                        "basis needs d >= 2 modes, got {}",
                        momenta.len()
                    )));
                }
                for i in 0..momenta.len() {
                    for j in (i + 1)..momenta.len() {
                        if momenta[i] == momenta[j] {
                            return Err(Error::Argument(format!(
                                "plane-wave momenta must be distinct; modes {i} and {j} coincide"
                            )));
                        }
                    }
                }
            }
            BasisKind::Vortex { charges, waist } => {
                if charges.len() < 2 {
                    return Err(Error::Dimension(format!(
                        "basis needs d >= 2 modes, got {}",
                        charges.len()
                    )));
                }
                let mut sorted = charges.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != charges.len() {
                    return Err(Error::Argument(
                        "vortex charges must be distinct".into(),
                    ));
                }
                if *waist <= 0.0 || !waist.is_finite() {
                    return Err(Error::Argument(format!(
                        "vortex waist must be positive, got {waist}"
                    )));
                }
            }
        }
        Ok(ModeBasis { kind, wavelength })
    }

    /// Build without the d ≥ 2 check. Degenerate single-mode bases are
    /// occasionally useful internally (flat-field references, limit tests).
    pub(crate) fn from_parts_unchecked(kind: BasisKind, wavelength: f64) -> Self {
        ModeBasis { kind, wavelength }
    }

    /// Convenience: 1D plane-wave basis from scalar momenta (rad/mm).
    pub fn plane_wave_1d(momenta: &[f64], wavelength: f64) -> Result<Self> {
        Self::new(
            BasisKind::PlaneWave {
                momenta: momenta.iter().map(|&p| Vec2::x_only(p)).collect(),
                dim: Dim::One,
            },
            wavelength,
        )
    }

    /// Convenience: vortex basis with the given topological charges.
    pub fn vortex(charges: &[i32], waist: f64, wavelength: f64) -> Result<Self> {
        Self::new(
            BasisKind::Vortex {
                charges: charges.to_vec(),
                waist,
            },
            wavelength,
        )
    }

    pub fn kind(&self) -> &BasisKind {
        &self.kind
    }

    /// Number of modes d.
    pub fn d(&self) -> usize {
        match &self.kind {
            BasisKind::PlaneWave { momenta, .. } => momenta.len(),
            BasisKind::Vortex { charges, .. } => charges.len(),
        }
    }

    pub fn dim(&self) -> Dim {
        match &self.kind {
            BasisKind::PlaneWave { dim, .. } => *dim,
            BasisKind::Vortex { .. } => Dim::Two,
        }
    }

    /// Wavelength in mm.
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Complex amplitude of mode `k` at transverse point `p`.
    pub fn amplitude(&self, k: usize, p: Vec2) -> Complex64 {
        match &self.kind {
            BasisKind::PlaneWave { momenta, .. } => {
                let phase = -momenta[k].dot(&p);
                Complex64::from_polar(1.0, phase)
            }
            BasisKind::Vortex { charges, waist } => {
                let ell = charges[k];
                let r = p.norm();
                let radial = lg_radial(ell, r, *waist);
                if ell == 0 {
                    Complex64::new(radial, 0.0)
                } else {
                    let phi = p.y.atan2(p.x);
                    Complex64::from_polar(radial, ell as f64 * phi)
                }
            }
        }
    }

    /// Amplitudes of every mode at `p`, as a length-d vector.
    pub fn amplitudes_at(&self, p: Vec2) -> DVector<Complex64> {
        DVector::from_iterator(self.d(), (0..self.d()).map(|k| self.amplitude(k, p)))
    }

    /// Short human-readable label for mode `k`.
    pub fn label(&self, k: usize) -> String {
        match &self.kind {
            BasisKind::PlaneWave { momenta, dim } => match dim {
                Dim::One => format!("p={}", momenta[k].x),
                Dim::Two => format!("p=({},{})", momenta[k].x, momenta[k].y),
            },
            BasisKind::Vortex { charges, .. } => format!("V{}", charges[k]),
        }
    }

    /// Conservative per-axis spatial-frequency bound of the basis (rad/mm),
    /// used for aliasing checks in quadratures.
    pub fn bandwidth(&self) -> f64 {
        match &self.kind {
            BasisKind::PlaneWave { momenta, .. } => momenta
                .iter()
                .map(|p| p.x.abs().max(p.y.abs()))
                .fold(0.0, f64::max),
            BasisKind::Vortex { charges, waist } => {
                let lmax = charges.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0);
                // LG_{0,ℓ} momentum-space envelope has waist 2/w0 and ring
                // radius (2/w0)·sqrt(|ℓ|/2); pad by a few envelope widths.
                (2.0 / waist) * ((lmax as f64 / 2.0).sqrt() + 4.0)
            }
        }
    }

    /// Support radius beyond which every mode is negligible (mm), used to
    /// size propagation source windows. Plane waves are unbounded and
    /// return `None`.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.kind {
            BasisKind::PlaneWave { .. } => None,
            BasisKind::Vortex { charges, waist } => {
                let lmax = charges.iter().map(|l| l.unsigned_abs()).max().unwrap_or(0);
                Some(waist * ((lmax as f64 / 2.0).sqrt() + 4.0))
            }
        }
    }
}

/// Radial envelope R_ℓ(r) of the LG_{p=0,ℓ} mode, normalized to unit L²
/// norm over the plane: R_ℓ(r) = √(2/(π|ℓ|!)) (√2 r/w0)^{|ℓ|} e^{−r²/w0²}/w0.
pub fn lg_radial(ell: i32, r: f64, waist: f64) -> f64 {
    let l = ell.unsigned_abs();
    let mut fact = 1.0;
    for k in 2..=l {
        fact *= k as f64;
    }
    let norm = (2.0 / (PI * fact)).sqrt() / waist;
    let u = std::f64::consts::SQRT_2 * r / waist;
    norm * u.powi(l as i32) * (-r * r / (waist * waist)).exp()
}

/// A convex mixture of kets defining a PSD coherence matrix.
#[derive(Debug, Clone)]
pub struct MixtureSpec {
    pub components: Vec<MixtureComponent>,
}

#[derive(Debug, Clone)]
pub struct MixtureComponent {
    pub weight: f64,
    pub ket: DVector<Complex64>,
}

impl MixtureSpec {
    pub fn new(components: Vec<(f64, DVector<Complex64>)>) -> Self {
        MixtureSpec {
            components: components
                .into_iter()
                .map(|(weight, ket)| MixtureComponent { weight, ket })
                .collect(),
        }
    }
}

/// d×d Hermitian PSD matrix housing the signal's second-order coherence in
/// a given mode basis. Stored as built (possibly unnormalized); use
/// [`CoherenceMatrix::normalized`] for the trace-1 view that metrics expect.
#[derive(Debug, Clone)]
pub struct CoherenceMatrix {
    rho: DMatrix<Complex64>,
    basis: ModeBasis,
}

impl CoherenceMatrix {
    /// Validate and store. Rejects non-square, non-Hermitian (beyond
    /// [`HERMITICITY_TOL`]), non-PSD (eigenvalue below
    /// [`PSD_EIG_FLOOR`]·trace) and nonpositive-trace matrices; the stored
    /// matrix is exactly hermitized.
    pub fn new(rho: DMatrix<Complex64>, basis: ModeBasis) -> Result<Self> {
        let d = basis.d();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::Dimension(format!(
                "coherence matrix is {}x{}, basis has d={d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let scale = linalg::max_abs(&rho).max(1.0);
        let dev = linalg::hermiticity_deviation(&rho);
        if dev > HERMITICITY_TOL * scale {
            return Err(Error::InvalidState(format!(
                "matrix not Hermitian: max deviation {dev:.3e}"
            )));
        }
        let rho = linalg::hermitize(&rho);
        let trace = linalg::trace_re(&rho);
        if !(trace > 0.0) {
            return Err(Error::InvalidState(format!(
                "trace must be positive, got {trace}"
            )));
        }
        let (eigs, _) = linalg::hermitian_eig(&rho);
        let min_eig = eigs.min();
        if min_eig < PSD_EIG_FLOOR * trace {
            return Err(Error::InvalidState(format!(
                "matrix not PSD: min eigenvalue {min_eig:.3e} (trace {trace:.3e})"
            )));
        }
        Ok(CoherenceMatrix { rho, basis })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn d(&self) -> usize {
        self.basis.d()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.rho)
    }

    /// Trace-1 view of the same state.
    pub fn normalized(&self) -> CoherenceMatrix {
        let t = self.trace();
        CoherenceMatrix {
            rho: &self.rho * Complex64::new(1.0 / t, 0.0),
            basis: self.basis.clone(),
        }
    }
}

/// ρ = Σ_c w_c |ket_c⟩⟨ket_c|, Hermitian PSD by construction.
pub fn coherence_from_mixture(spec: &MixtureSpec, basis: &ModeBasis) -> Result<CoherenceMatrix> {
    let d = basis.d();
    if spec.components.is_empty() {
        return Err(Error::Argument("mixture needs at least one component".into()));
    }
    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    let mut any_positive = false;
    for (c, comp) in spec.components.iter().enumerate() {
        if comp.ket.len() != d {
            return Err(Error::Dimension(format!(
                "component {c} ket has length {}, basis has d={d}",
                comp.ket.len()
            )));
        }
        if comp.weight < 0.0 || !comp.weight.is_finite() {
            return Err(Error::Argument(format!(
                "component {c} weight must be nonnegative, got {}",
                comp.weight
            )));
        }
        if comp.weight > 0.0 {
            any_positive = true;
        }
        let w = Complex64::new(comp.weight, 0.0);
        // ρ_{mn} += w k_m conj(k_n)
        for m in 0..d {
            for n in 0..d {
                rho[(m, n)] += w * comp.ket[m] * comp.ket[n].conj();
            }
        }
    }
    if !any_positive {
        return Err(Error::Argument("at least one mixture weight must be > 0".into()));
    }
    CoherenceMatrix::new(rho, basis.clone())
}

/// Fidelity F = Tr[√(√a b √a)] between two states sharing a basis; both
/// are compared through their trace-1 views. F ∈ [0,1], 1 iff equal.
pub fn fidelity(a: &CoherenceMatrix, b: &CoherenceMatrix) -> Result<f64> {
    if a.basis != b.basis {
        return Err(Error::Dimension(
            "fidelity requires both states in the same basis".into(),
        ));
    }
    let an = a.normalized();
    let bn = b.normalized();
    let sqrt_a = linalg::hermitian_map(an.matrix(), |l| l.max(0.0).sqrt());
    let inner = &sqrt_a * bn.matrix() * &sqrt_a;
    let (eigs, _) = linalg::hermitian_eig(&linalg::hermitize(&inner));
    let f: f64 = eigs.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Intensity I(x) = Σ_{mn} ψ_m(x) ρ_mn ψ_n*(x), the diagonal of the mutual
/// coherence function. Clamped at zero against −1e-12-scale rounding.
pub fn intensity_at(rho: &CoherenceMatrix, point: Vec2) -> f64 {
    let amps = rho.basis.amplitudes_at(point);
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..rho.d() {
        for n in 0..rho.d() {
            acc += amps[m] * rho.rho[(m, n)] * amps[n].conj();
        }
    }
    acc.re.max(0.0)
}

/// Purity Tr(ρ²) of the trace-1 view; 1 for pure states, ≥ 1/d.
pub fn purity(rho: &CoherenceMatrix) -> f64 {
    let n = rho.normalized();
    // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ.
    n.rho.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn qubit_basis() -> ModeBasis {
        ModeBasis::plane_wave_1d(&[-1.0, 1.0], 5e-4).unwrap()
    }

    fn e(d: usize, k: usize) -> DVector<Complex64> {
        DVector::from_fn(d, |i, _| {
            if i == k {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// The partially coherent vortex state used throughout: a coherent
    /// superposition V−3 − (i/2)V−6 mixed incoherently with V3 at weight 1/2,
    /// over charges ℓ ∈ {−9,−6,−3,0,3,6,9}.
    pub(crate) fn eq5_state(basis: &ModeBasis) -> CoherenceMatrix {
        let mut ket1 = DVector::from_element(7, Complex64::new(0.0, 0.0));
        ket1[2] = Complex64::new(1.0, 0.0); // V−3
        ket1[1] = Complex64::new(0.0, -0.5); // −(i/2) V−6
        let mut ket2 = DVector::from_element(7, Complex64::new(0.0, 0.0));
        ket2[4] = Complex64::new(1.0, 0.0); // V3
        coherence_from_mixture(&MixtureSpec::new(vec![(1.0, ket1), (0.5, ket2)]), basis)
            .unwrap()
    }

    #[test]
    fn mixture_pure_basis_state() {
        let basis = qubit_basis();
        let rho = coherence_from_mixture(&MixtureSpec::new(vec![(1.0, e(2, 0))]), &basis).unwrap();
        assert_relative_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(rho.matrix()[(1, 1)].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(rho.matrix()[(0, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mixture_matches_stated_vortex_elements() {
        let basis = ModeBasis::vortex(&[-9, -6, -3, 0, 3, 6, 9], 0.15, 6.33e-4).unwrap();
        let rho = eq5_state(&basis);
        let m = rho.matrix();
        // Unnormalized elements: indices 1 ↔ ℓ=−6, 2 ↔ ℓ=−3, 4 ↔ ℓ=+3.
        assert_relative_eq!(m[(2, 2)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(m[(1, 1)].re, 0.25, epsilon = 1e-14);
        assert_relative_eq!(m[(4, 4)].re, 0.5, epsilon = 1e-14);
        // ρ_{−3,−6} = ⟨index 2 row, index 1 col⟩ = 1·conj(−i/2) = +i/2.
        assert_relative_eq!(m[(2, 1)].im, 0.5, epsilon = 1e-14);
        assert_relative_eq!(m[(1, 2)].im, -0.5, epsilon = 1e-14);
        assert_relative_eq!(m[(2, 1)].re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn mixture_dimension_mismatch() {
        let basis = qubit_basis();
        let err = coherence_from_mixture(&MixtureSpec::new(vec![(1.0, e(3, 0))]), &basis);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn maximally_mixed_qubit_purity() {
        let basis = qubit_basis();
        let rho = coherence_from_mixture(
            &MixtureSpec::new(vec![(0.5, e(2, 0)), (0.5, e(2, 1))]),
            &basis,
        )
        .unwrap();
        assert_relative_eq!(rho.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(purity(&rho), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_identity_and_orthogonal() {
        let basis = qubit_basis();
        let a = coherence_from_mixture(&MixtureSpec::new(vec![(1.0, e(2, 0))]), &basis).unwrap();
        let b = coherence_from_mixture(&MixtureSpec::new(vec![(1.0, e(2, 1))]), &basis).unwrap();
        assert_relative_eq!(fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        assert!(fidelity(&a, &b).unwrap() < 1e-10);
    }

    #[test]
    fn fidelity_pure_vs_mixed_closed_form() {
        // Commuting case F(diag(1,0), diag(1/2,1/2)) = √(1·1/2) + √(0·1/2) = √0.5.
        let basis = qubit_basis();
        let a = coherence_from_mixture(&MixtureSpec::new(vec![(1.0, e(2, 0))]), &basis).unwrap();
        let b = coherence_from_mixture(
            &MixtureSpec::new(vec![(0.5, e(2, 0)), (0.5, e(2, 1))]),
            &basis,
        )
        .unwrap();
        assert_relative_eq!(fidelity(&a, &b).unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn fidelity_unitary_invariance() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let d = 4;
        let basis = ModeBasis::plane_wave_1d(&[-1.5, -0.5, 0.5, 1.5], 5e-4).unwrap();
        for _ in 0..10 {
            let ra = random_psd(d, &mut rng);
            let rb = random_psd(d, &mut rng);
            let a = CoherenceMatrix::new(ra.clone(), basis.clone()).unwrap();
            let b = CoherenceMatrix::new(rb.clone(), basis.clone()).unwrap();
            let f0 = fidelity(&a, &b).unwrap();
            let u = random_unitary(d, &mut rng);
            let au = CoherenceMatrix::new(&u * ra * u.adjoint(), basis.clone()).unwrap();
            let bu = CoherenceMatrix::new(&u * rb * u.adjoint(), basis.clone()).unwrap();
            let f1 = fidelity(&au, &bu).unwrap();
            assert_relative_eq!(f0, f1, epsilon = 1e-9);
        }
    }

    pub(crate) fn random_psd(d: usize, rng: &mut impl rand::Rng) -> DMatrix<Complex64> {
        let g = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let m = &g * g.adjoint();
        let t = linalg::trace_re(&m);
        m * Complex64::new(1.0 / t, 0.0)
    }

    pub(crate) fn random_unitary(d: usize, rng: &mut impl rand::Rng) -> DMatrix<Complex64> {
        // QR of a Ginibre matrix.
        let g = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let qr = g.qr();
        qr.q()
    }

    #[test]
    fn intensity_plane_wave_is_unit() {
        let basis = qubit_basis();
        let rho = coherence_from_mixture(&MixtureSpec::new(vec![(1.0, e(2, 0))]), &basis).unwrap();
        for &x in &[-3.0, 0.0, 0.7, 12.0] {
            assert_relative_eq!(intensity_at(&rho, Vec2::x_only(x)), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn intensity_vortex_axis_singularity() {
        let basis = ModeBasis::vortex(&[0, 3], 0.2, 6.33e-4).unwrap();
        let rho = coherence_from_mixture(&MixtureSpec::new(vec![(1.0, e(2, 1))]), &basis).unwrap();
        assert_eq!(intensity_at(&rho, Vec2::ZERO), 0.0);
        assert!(intensity_at(&rho, Vec2::new(0.2, 0.1)) > 0.0);
    }

    #[test]
    fn intensity_matches_brute_force_mode_sum() {
        // Independent double-sum with the opposite accumulation order.
        let basis = ModeBasis::vortex(&[-9, -6, -3, 0, 3, 6, 9], 0.15, 6.33e-4).unwrap();
        let rho = eq5_state(&basis);
        for i in 0..5 {
            for j in 0..4 {
                let p = Vec2::new(-0.2 + 0.1 * i as f64, -0.15 + 0.09 * j as f64);
                let amps: Vec<Complex64> = (0..7).map(|k| basis.amplitude(k, p)).collect();
                let mut brute = Complex64::new(0.0, 0.0);
                for n in (0..7).rev() {
                    for m in (0..7).rev() {
                        brute += amps[m] * rho.matrix()[(m, n)] * amps[n].conj();
                    }
                }
                assert_relative_eq!(intensity_at(&rho, p), brute.re, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_vortex_mixture_is_rotationally_symmetric() {
        let basis = ModeBasis::vortex(&[-3, 0, 3], 0.2, 6.33e-4).unwrap();
        let rho = coherence_from_mixture(
            &MixtureSpec::new(vec![(0.3, e(3, 0)), (0.5, e(3, 1)), (0.2, e(3, 2))]),
            &basis,
        )
        .unwrap();
        for &r in &[0.05, 0.15, 0.3] {
            let i0 = intensity_at(&rho, Vec2::new(r, 0.0));
            for k in 1..12 {
                let phi = 2.0 * PI * k as f64 / 12.0;
                let p = Vec2::new(r * phi.cos(), r * phi.sin());
                assert_relative_eq!(intensity_at(&rho, p), i0, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn purity_bounds() {
        let basis = ModeBasis::vortex(&[-9, -6, -3, 0, 3, 6, 9], 0.15, 6.33e-4).unwrap();
        let rho = eq5_state(&basis);
        let p = purity(&rho);
        // Oracle: direct matrix product on the normalized matrix.
        let n = rho.normalized();
        let sq = n.matrix() * n.matrix();
        let tr: f64 = (0..7).map(|i| sq[(i, i)].re).sum();
        assert_relative_eq!(p, tr, epsilon = 1e-12);
        assert!(p <= 1.0 + 1e-12 && p >= 1.0 / 7.0 - 1e-12);

        let pure = coherence_from_mixture(&MixtureSpec::new(vec![(2.0, e(7, 3))]), &basis).unwrap();
        assert_relative_eq!(purity(&pure), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constructor_rejects_bad_matrices() {
        let basis = qubit_basis();
        let non_herm = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.1, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(
            CoherenceMatrix::new(non_herm, basis.clone()),
            Err(Error::InvalidState(_))
        ));
        let neg = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.5, 0.0),
            ],
        );
        assert!(matches!(
            CoherenceMatrix::new(neg, basis.clone()),
            Err(Error::InvalidState(_))
        ));
        let zero = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        assert!(CoherenceMatrix::new(zero, basis).is_err());
    }

    #[test]
    fn lg_radial_unit_norm() {
        // ∫ |R_ℓ|² 2πr dr = 1 by quadrature.
        for &ell in &[0, 1, 4, 9] {
            let w0 = 0.17;
            let n = 4000;
            let rmax = 8.0 * w0;
            let dr = rmax / n as f64;
            let mut acc = 0.0;
            for i in 0..n {
                let r = (i as f64 + 0.5) * dr;
                let v = lg_radial(ell, r, w0);
                acc += v * v * 2.0 * PI * r * dr;
            }
            assert_relative_eq!(acc, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn basis_validation() {
        assert!(ModeBasis::plane_wave_1d(&[1.0], 5e-4).is_err());
        assert!(ModeBasis::plane_wave_1d(&[1.0, 1.0], 5e-4).is_err());
        assert!(ModeBasis::vortex(&[0, 0], 0.1, 5e-4).is_err());
        assert!(ModeBasis::vortex(&[0, 1], -0.1, 5e-4).is_err());
        assert!(ModeBasis::vortex(&[0, 1], 0.1, 0.0).is_err());
    }
}
