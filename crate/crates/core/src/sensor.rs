//! Shack-Hartmann instrument model.
//!
//! Each microlens at Δx_i truncates the field by its aperture A and Fourier
//! transforms it onto the detector; the pixel at momentum displacement Δp_j
//! measures I(Δx_i, Δp_j) = Tr(ρ Π_ij) with the rank-one operator
//! (Π_ij)_{mn} = ψ_{n,i}(Δp_j) ψ*_{m,i}(Δp_j), where
//!
//!   ψ_{m,i}(Δp_j) = ∫ A*(x) ψ_m(x + Δx_i) e^{−i Δp_j·x} dx
//!
//! evaluated by midpoint quadrature on an N-point grid per axis. Pixel
//! positions u map to momenta through the lens Fourier scaling
//! Δp = 2π u / (λ f).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{CoherenceMatrix, Dim, ModeBasis, Vec2};

/// Rank-1 spectral tolerance: second eigenvalue ≤ 1e-10 × largest.
pub const RANK_ONE_TOL: f64 = 1e-10;

/// unnormalized sinc(z) = sin(z)/z, sinc(0) = 1.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Microlens pupil function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Aperture {
    /// Square indicator of the given side (mm).
    Square { side: f64 },
    /// Regular hexagon, flat-to-flat width (mm), two edges parallel to x.
    Hexagon { width: f64 },
    /// A(x) = exp(−|x|²/(2 waist²)); overlapping Gaussians are allowed
    /// (they are the idealized Husimi-sampling limit, not physical pupils).
    Gaussian { waist: f64 },
    /// Delta pupil: position is sampled exactly, momentum information lost.
    Pointlike,
    /// A = 1 on a numerical window of the given full width (mm).
    Unbounded { window: f64 },
}

impl Aperture {
    /// Pupil amplitude at local coordinate `p` (real for every family here).
    pub fn amplitude(&self, p: Vec2) -> f64 {
        match self {
            Aperture::Square { side } => {
                let h = side / 2.0;
                if p.x.abs() <= h && p.y.abs() <= h {
                    1.0
                } else {
                    0.0
                }
            }
            Aperture::Hexagon { width } => {
                let h = width / 2.0;
                let a = p.y.abs();
                let b = (0.5 * p.y + 3f64.sqrt() / 2.0 * p.x).abs();
                let c = (0.5 * p.y - 3f64.sqrt() / 2.0 * p.x).abs();
                if a.max(b).max(c) <= h {
                    1.0
                } else {
                    0.0
                }
            }
            Aperture::Gaussian { waist } => (-p.norm().powi(2) / (2.0 * waist * waist)).exp(),
            Aperture::Pointlike => 0.0, // handled as a special case, never sampled
            Aperture::Unbounded { .. } => 1.0,
        }
    }

    /// Full quadrature window (wx, wy) covering the pupil support.
    fn window(&self) -> (f64, f64) {
        match self {
            Aperture::Square { side } => (*side, *side),
            Aperture::Hexagon { width } => (2.0 * width / 3f64.sqrt(), *width),
            Aperture::Gaussian { waist } => (14.0 * waist, 14.0 * waist),
            Aperture::Pointlike => (0.0, 0.0),
            Aperture::Unbounded { window } => (*window, *window),
        }
    }

    /// Nominal width used by the lens non-overlap rule; `None` for families
    /// without compact physical support.
    fn exclusion_width(&self) -> Option<f64> {
        match self {
            Aperture::Square { side } => Some(*side),
            Aperture::Hexagon { width } => Some(*width),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Aperture::Square { side } => *side > 0.0,
            Aperture::Hexagon { width } => *width > 0.0,
            Aperture::Gaussian { waist } => *waist > 0.0,
            Aperture::Pointlike => true,
            Aperture::Unbounded { window } => *window > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "aperture size must be positive: {self:?}"
            )))
        }
    }
}

/// Detector pixels behind one lens, identical for every lens.
#[derive(Debug, Clone, PartialEq)]
pub enum PixelGrid {
    /// nu×nv grid of square pixels of the given pitch (mm), centred on the
    /// lens axis; momenta follow Δp = 2π u/(λf).
    Physical { nu: usize, nv: usize, pitch: f64 },
    /// Explicit momentum displacements (rad/mm), 1D.
    Momenta1D(Vec<f64>),
    /// Explicit momentum displacements (rad/mm), 2D.
    Momenta2D(Vec<Vec2>),
}

impl PixelGrid {
    pub fn len(&self) -> usize {
        match self {
            PixelGrid::Physical { nu, nv, .. } => nu * nv,
            PixelGrid::Momenta1D(v) => v.len(),
            PixelGrid::Momenta2D(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sensor geometry: microlens positions, pupils, focal length, detector
/// grid, wavelength and quadrature resolution.
#[derive(Debug, Clone)]
pub struct SensorGeometry {
    pub lens_centers: Vec<Vec2>,
    pub aperture: Aperture,
    /// Focal length (mm).
    pub focal_length: f64,
    pub pixel_grid: PixelGrid,
    /// Wavelength (mm).
    pub wavelength: f64,
    /// Quadrature points per axis per aperture; ≥ 32 and a power of two.
    pub quadrature_n: usize,
    /// Average each pixel over 2×2 sub-samples instead of a centre sample.
    pub finite_pixel_area: bool,
    pub dim: Dim,
}

impl SensorGeometry {
    pub fn new(
        lens_centers: Vec<Vec2>,
        aperture: Aperture,
        focal_length: f64,
        pixel_grid: PixelGrid,
        wavelength: f64,
        quadrature_n: usize,
        dim: Dim,
    ) -> Result<Self> {
        let geom = SensorGeometry {
            lens_centers,
            aperture,
            focal_length,
            pixel_grid,
            wavelength,
            quadrature_n,
            finite_pixel_area: false,
            dim,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lens_centers.is_empty() {
            return Err(Error::Geometry("at least one lens required".into()));
        }
        self.aperture.validate()?;
        if self.focal_length <= 0.0 {
            return Err(Error::Argument("focal length must be positive".into()));
        }
        if self.wavelength <= 0.0 {
            return Err(Error::Argument("wavelength must be positive".into()));
        }
        if self.quadrature_n < 32 || !self.quadrature_n.is_power_of_two() {
            return Err(Error::Argument(format!(
                "quadrature_n must be a power of two >= 32, got {}",
                self.quadrature_n
            )));
        }
        if self.pixel_grid.is_empty() {
            return Err(Error::Geometry("pixel grid is empty".into()));
        }
        if let PixelGrid::Physical { nu, nv, pitch } = &self.pixel_grid {
            if *pitch <= 0.0 {
                return Err(Error::Argument("pixel pitch must be positive".into()));
            }
            if *nu == 0 || *nv == 0 {
                return Err(Error::Geometry("pixel grid is empty".into()));
            }
            if self.dim == Dim::One && *nv != 1 {
                return Err(Error::Geometry("1D geometry requires nv = 1".into()));
            }
        }
        if self.finite_pixel_area && !matches!(self.pixel_grid, PixelGrid::Physical { .. }) {
            return Err(Error::Argument(
                "finite pixel area requires a physical pixel grid".into(),
            ));
        }
        match (&self.pixel_grid, self.dim) {
            (PixelGrid::Momenta1D(_), Dim::Two) => {
                return Err(Error::Geometry("1D pixel grid in a 2D geometry".into()))
            }
            (PixelGrid::Momenta2D(_), Dim::One) => {
                return Err(Error::Geometry("2D pixel grid in a 1D geometry".into()))
            }
            _ => {}
        }
        for i in 0..self.lens_centers.len() {
            for j in (i + 1)..self.lens_centers.len() {
                let dist = self.lens_centers[i].sub(&self.lens_centers[j]).norm();
                if dist == 0.0 {
                    return Err(Error::Geometry(format!("lenses {i} and {j} coincide")));
                }
                // Compact pupils must not overlap; the paper's Gaussian
                // profiles are exempt by construction.
                if let Some(w) = self.aperture.exclusion_width() {
                    if dist < w {
                        return Err(Error::Geometry(format!(
                            "apertures of lenses {i} and {j} overlap (distance {dist}, width {w})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_lenses(&self) -> usize {
        self.lens_centers.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.pixel_grid.len()
    }

    /// Momentum displacement Δp_j of every pixel (rad/mm), row-major with
    /// the u index fastest for physical grids.
    pub fn pixel_momenta(&self) -> Vec<Vec2> {
        match &self.pixel_grid {
            PixelGrid::Physical { .. } => {
                let (us, vs) = self.momentum_axes().expect("physical grid");
                let mut out = Vec::with_capacity(us.len() * vs.len());
                for &v in &vs {
                    for &u in &us {
                        out.push(Vec2::new(u, v));
                    }
                }
                out
            }
            PixelGrid::Momenta1D(v) => v.iter().map(|&p| Vec2::x_only(p)).collect(),
            PixelGrid::Momenta2D(v) => v.clone(),
        }
    }

    /// Detector-plane position u_j of every pixel (mm), same ordering.
    pub fn pixel_positions(&self) -> Vec<Vec2> {
        let s = self.wavelength * self.focal_length / (2.0 * PI);
        self.pixel_momenta().iter().map(|p| p.scale(s)).collect()
    }

    /// Separable momentum axes (pu, pv) for physical grids.
    fn momentum_axes(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if let PixelGrid::Physical { nu, nv, pitch } = &self.pixel_grid {
            let s = 2.0 * PI / (self.wavelength * self.focal_length);
            let us = (0..*nu)
                .map(|a| (a as f64 - (*nu as f64 - 1.0) / 2.0) * pitch * s)
                .collect();
            let vs = (0..*nv)
                .map(|b| (b as f64 - (*nv as f64 - 1.0) / 2.0) * pitch * s)
                .collect();
            Some((us, vs))
        } else {
            None
        }
    }
}

/// Centers of a 7-lens hexagonal array: one on axis, six on a ring of the
/// given pitch.
pub fn hex7_centers(pitch: f64) -> Vec<Vec2> {
    let mut centers = vec![Vec2::ZERO];
    for k in 0..6 {
        let ang = PI / 3.0 * k as f64;
        centers.push(Vec2::new(pitch * ang.cos(), pitch * ang.sin()));
    }
    centers
}

/// Rank-one measurement operator of one (lens, pixel) pair: Π = w w† with
/// w = conj(response column), so Tr(ρΠ) = w†ρw.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    pub pi: DMatrix<Complex64>,
    /// Factor vector: pi = ket·ket†.
    pub ket: DVector<Complex64>,
    pub lens_index: usize,
    pub pixel_index: usize,
}

impl MeasurementOperator {
    fn from_response_column(v: &DVector<Complex64>, lens: usize, pixel: usize) -> Self {
        let ket = v.map(|z| z.conj());
        let pi = &ket * ket.adjoint();
        MeasurementOperator {
            pi,
            ket,
            lens_index: lens,
            pixel_index: pixel,
        }
    }

    /// Born-rule expectation Tr(ρΠ) = ket†ρ ket (real, ≥ 0 for PSD ρ).
    pub fn expectation(&self, rho: &DMatrix<Complex64>) -> f64 {
        let tmp = rho * &self.ket;
        self.ket.dotc(&tmp).re
    }
}

/// Check the quadrature step against the total spatial frequency content.
fn aliasing_check(basis: &ModeBasis, momenta: &[Vec2], step: f64) -> Result<()> {
    let max_dp = momenta
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(0.0, f64::max);
    let total = basis.bandwidth() + max_dp;
    if total * step > PI {
        return Err(Error::Sampling(format!(
            "grid step {step:.3e} mm cannot resolve spatial frequency {total:.3e} rad/mm \
             (step × bandwidth = {:.3} > π); increase quadrature_n",
            total * step
        )));
    }
    Ok(())
}

/// Response amplitudes ψ_{m,i}(Δp_j) of every basis mode at every pixel of
/// lens `lens`: a d×J matrix with modes as rows.
pub fn response_amplitudes(
    basis: &ModeBasis,
    geom: &SensorGeometry,
    lens: usize,
) -> Result<DMatrix<Complex64>> {
    let momenta = geom.pixel_momenta();
    response_inner(basis, geom, lens, &momenta, geom.momentum_axes())
}

/// Same as [`response_amplitudes`] for an arbitrary momentum list.
pub fn response_amplitudes_at(
    basis: &ModeBasis,
    geom: &SensorGeometry,
    lens: usize,
    momenta: &[Vec2],
) -> Result<DMatrix<Complex64>> {
    response_inner(basis, geom, lens, momenta, None)
}

fn response_inner(
    basis: &ModeBasis,
    geom: &SensorGeometry,
    lens: usize,
    momenta: &[Vec2],
    axes: Option<(Vec<f64>, Vec<f64>)>,
) -> Result<DMatrix<Complex64>> {
    if lens >= geom.n_lenses() {
        return Err(Error::Argument(format!(
            "lens index {lens} out of range ({} lenses)",
            geom.n_lenses()
        )));
    }
    if basis.dim() != geom.dim {
        return Err(Error::Dimension(
            "basis and geometry dimensionality differ".into(),
        ));
    }
    let d = basis.d();
    let j_count = momenta.len();
    let center = geom.lens_centers[lens];

    // Pointlike pupil: ψ_{m,i}(Δp) = ψ_m(Δx_i), independent of the pixel.
    if matches!(geom.aperture, Aperture::Pointlike) {
        let amps = basis.amplitudes_at(center);
        return Ok(DMatrix::from_fn(d, j_count, |m, _| amps[m]));
    }

    let n = geom.quadrature_n;
    let (wx, wy) = geom.aperture.window();

    match geom.dim {
        Dim::One => {
            let h = wx / n as f64;
            aliasing_check(basis, momenta, h)?;
            let xs: Vec<f64> = (0..n).map(|k| -wx / 2.0 + (k as f64 + 0.5) * h).collect();
            let mut out = DMatrix::zeros(d, j_count);
            for m in 0..d {
                // A is real for all pupil families; conj(A) = A.
                let f: Vec<Complex64> = xs
                    .iter()
                    .map(|&x| {
                        let a = geom.aperture.amplitude(Vec2::x_only(x));
                        basis.amplitude(m, Vec2::x_only(x + center.x)) * (a * h)
                    })
                    .collect();
                for (j, dp) in momenta.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, &x) in xs.iter().enumerate() {
                        acc += f[k] * Complex64::from_polar(1.0, -dp.x * x);
                    }
                    out[(m, j)] = acc;
                }
            }
            Ok(out)
        }
        Dim::Two => {
            let hx = wx / n as f64;
            let hy = wy / n as f64;
            aliasing_check(basis, momenta, hx.max(hy))?;
            let xs: Vec<f64> = (0..n).map(|k| -wx / 2.0 + (k as f64 + 0.5) * hx).collect();
            let ys: Vec<f64> = (0..n).map(|k| -wy / 2.0 + (k as f64 + 0.5) * hy).collect();
            let cell = hx * hy;

            let rows: Vec<Vec<Complex64>> = (0..d)
                .into_par_iter()
                .map(|m| {
                    // Sampled integrand f[k][l] = A·ψ_m·cell.
                    let mut f = vec![Complex64::new(0.0, 0.0); n * n];
                    for (k, &x) in xs.iter().enumerate() {
                        for (l, &y) in ys.iter().enumerate() {
                            let a = geom.aperture.amplitude(Vec2::new(x, y));
                            if a != 0.0 {
                                f[k * n + l] = basis
                                    .amplitude(m, Vec2::new(x + center.x, y + center.y))
                                    * (a * cell);
                            }
                        }
                    }
                    let mut row = vec![Complex64::new(0.0, 0.0); j_count];
                    if let Some((us, vs)) = &axes {
                        // Separable grid: sum over y per (x, pv), then over x.
                        let nv = vs.len();
                        let mut t = vec![Complex64::new(0.0, 0.0); n * nv];
                        for k in 0..n {
                            for (b, &pv) in vs.iter().enumerate() {
                                let mut acc = Complex64::new(0.0, 0.0);
                                for (l, &y) in ys.iter().enumerate() {
                                    acc += f[k * n + l] * Complex64::from_polar(1.0, -pv * y);
                                }
                                t[k * nv + b] = acc;
                            }
                        }
                        for b in 0..nv {
                            for (a_i, &pu) in us.iter().enumerate() {
                                let mut acc = Complex64::new(0.0, 0.0);
                                for (k, &x) in xs.iter().enumerate() {
                                    acc += t[k * nv + b] * Complex64::from_polar(1.0, -pu * x);
                                }
                                row[b * us.len() + a_i] = acc;
                            }
                        }
                    } else {
                        for (j, dp) in momenta.iter().enumerate() {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (k, &x) in xs.iter().enumerate() {
                                for (l, &y) in ys.iter().enumerate() {
                                    let fv = f[k * n + l];
                                    if fv != Complex64::new(0.0, 0.0) {
                                        acc += fv
                                            * Complex64::from_polar(1.0, -(dp.x * x + dp.y * y));
                                    }
                                }
                            }
                            row[j] = acc;
                        }
                    }
                    row
                })
                .collect();

            let mut out = DMatrix::zeros(d, j_count);
            for (m, row) in rows.into_iter().enumerate() {
                for (j, v) in row.into_iter().enumerate() {
                    out[(m, j)] = v;
                }
            }
            Ok(out)
        }
    }
}

/// Measurement operator Π_ij for one (lens, pixel) pair.
pub fn povm_element(
    basis: &ModeBasis,
    geom: &SensorGeometry,
    lens: usize,
    pixel: usize,
) -> Result<MeasurementOperator> {
    if pixel >= geom.n_pixels() {
        return Err(Error::Argument(format!(
            "pixel index {pixel} out of range ({} pixels)",
            geom.n_pixels()
        )));
    }
    let resp = response_amplitudes(basis, geom, lens)?;
    let v = resp.column(pixel).into_owned();
    Ok(MeasurementOperator::from_response_column(&v, lens, pixel))
}

/// All measurement operators of the setup, ordered (lens, pixel) row-major.
/// One response evaluation per lens.
pub fn povm_all(basis: &ModeBasis, geom: &SensorGeometry) -> Result<Vec<MeasurementOperator>> {
    let per_lens: Vec<DMatrix<Complex64>> = (0..geom.n_lenses())
        .map(|i| response_amplitudes(basis, geom, i))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(geom.n_lenses() * geom.n_pixels());
    for (i, resp) in per_lens.iter().enumerate() {
        for j in 0..geom.n_pixels() {
            let v = resp.column(j).into_owned();
            out.push(MeasurementOperator::from_response_column(&v, i, j));
        }
    }
    Ok(out)
}

/// Analytic square-aperture / plane-wave measurement matrix
/// (Π)_{mn} = sinc(z_m) sinc(z_n) e^{i(p_m − p_n)Δx}, z = (Δp+p)·a/2,
/// in the unit-peak convention sinc(0)² = 1. The numeric quadrature path
/// carries an extra factor a² (the squared pupil integral).
pub fn sinc_povm_analytic(
    p_momenta: &[f64],
    dx: f64,
    dp: f64,
    aperture_side: f64,
) -> MeasurementOperator {
    let d = p_momenta.len();
    let v = DVector::from_iterator(
        d,
        p_momenta.iter().map(|&p| {
            let z = (dp + p) * aperture_side / 2.0;
            Complex64::from_polar(1.0, -p * dx) * sinc(z)
        }),
    );
    MeasurementOperator::from_response_column(&v, 0, 0)
}

/// Continuum overlap ⟨π_a|π_b⟩ of two aperture states
/// π(x) = A(x−Δx) e^{iΔp·(x−Δx)}, by quadrature on the union of supports.
/// Exactly zero for disjoint compact pupils.
pub fn aperture_state_overlap(
    geom: &SensorGeometry,
    lens_a: usize,
    dp_a: Vec2,
    lens_b: usize,
    dp_b: Vec2,
) -> Complex64 {
    let (wx, _) = geom.aperture.window();
    let ca = geom.lens_centers[lens_a];
    let cb = geom.lens_centers[lens_b];
    let lo = (ca.x - wx / 2.0).min(cb.x - wx / 2.0);
    let hi = (ca.x + wx / 2.0).max(cb.x + wx / 2.0);
    let n = geom.quadrature_n * 4;
    let h = (hi - lo) / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let x = lo + (k as f64 + 0.5) * h;
        let fa = geom.aperture.amplitude(Vec2::x_only(x - ca.x))
            * Complex64::from_polar(1.0, dp_a.x * (x - ca.x));
        let fb = geom.aperture.amplitude(Vec2::x_only(x - cb.x))
            * Complex64::from_polar(1.0, dp_b.x * (x - cb.x));
        acc += fa.conj() * fb * h;
    }
    acc
}

/// Detector record: (lens, pixel) → intensity, plus the exposure scale the
/// values are expressed in.
#[derive(Debug, Clone)]
pub struct IntensityRecord {
    pub values: BTreeMap<(usize, usize), f64>,
    pub scale: f64,
}

impl IntensityRecord {
    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.values().copied().fold(0.0, f64::max)
    }

    /// Total intensity behind one lens.
    pub fn lens_total(&self, lens: usize) -> f64 {
        self.values
            .iter()
            .filter(|((i, _), _)| *i == lens)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn get(&self, lens: usize, pixel: usize) -> Option<f64> {
        self.values.get(&(lens, pixel)).copied()
    }

    pub fn validate(&self) -> Result<()> {
        for (&(i, j), &v) in &self.values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::DegenerateData(format!(
                    "intensity at lens {i} pixel {j} is {v}"
                )));
            }
        }
        if self.scale <= 0.0 {
            return Err(Error::Argument("exposure scale must be positive".into()));
        }
        Ok(())
    }
}

/// Detector noise model; all randomness flows through a seeded generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    /// Additive zero-mean Gaussian, σ given as a fraction of the maximum
    /// noiseless intensity.
    AdditiveGaussian { sigma_frac: f64 },
    /// Redistribute the record as Poissonian photon counts with the given
    /// expected total.
    Poisson { total_photons: f64 },
    /// Constant background offset plus Gaussian jitter, both as fractions
    /// of the maximum noiseless intensity.
    Background { offset_frac: f64, sigma_frac: f64 },
}

impl NoiseSpec {
    fn apply(&self, values: &mut BTreeMap<(usize, usize), f64>, rng: &mut ChaCha8Rng) {
        use rand_distr::{Distribution, Normal, Poisson};
        match self {
            NoiseSpec::None => {}
            NoiseSpec::AdditiveGaussian { sigma_frac } => {
                let max = values.values().copied().fold(0.0, f64::max);
                let sigma = sigma_frac * max;
                if sigma > 0.0 {
                    let normal = Normal::new(0.0, sigma).unwrap();
                    for v in values.values_mut() {
                        *v = (*v + normal.sample(rng)).max(0.0);
                    }
                }
            }
            NoiseSpec::Poisson { total_photons } => {
                let total: f64 = values.values().sum();
                if total > 0.0 {
                    for v in values.values_mut() {
                        let lambda = *v / total * total_photons;
                        *v = if lambda > 0.0 {
                            Poisson::new(lambda).unwrap().sample(rng)
                        } else {
                            0.0
                        };
                    }
                }
            }
            NoiseSpec::Background {
                offset_frac,
                sigma_frac,
            } => {
                let max = values.values().copied().fold(0.0, f64::max);
                let offset = offset_frac * max;
                let sigma = sigma_frac * max;
                let normal = (sigma > 0.0).then(|| Normal::new(0.0, sigma).unwrap());
                for v in values.values_mut() {
                    let jitter = normal.as_ref().map_or(0.0, |n| n.sample(rng));
                    *v = (*v + offset + jitter).max(0.0);
                }
            }
        }
    }
}

/// Simulate the CCD record I_ij = Tr(ρ Π_ij), then apply noise. Noiseless
/// values are clamped at zero against −1e-12-scale rounding.
pub fn simulate_intensities(
    rho: &CoherenceMatrix,
    geom: &SensorGeometry,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<IntensityRecord> {
    let basis = rho.basis();
    let rho_m = rho.matrix();
    let mut values = BTreeMap::new();

    if geom.finite_pixel_area {
        // Average sub-samples displaced by ±pitch/4 per axis.
        let pitch = match geom.pixel_grid {
            PixelGrid::Physical { pitch, .. } => pitch,
            _ => unreachable!("validated at construction"),
        };
        let s = 2.0 * PI / (geom.wavelength * geom.focal_length);
        let q = pitch / 4.0 * s;
        let (us, vs) = geom.momentum_axes().expect("physical grid");
        let offsets = match geom.dim {
            Dim::One => vec![Vec2::x_only(-q), Vec2::x_only(q)],
            Dim::Two => vec![
                Vec2::new(-q, -q),
                Vec2::new(-q, q),
                Vec2::new(q, -q),
                Vec2::new(q, q),
            ],
        };
        for i in 0..geom.n_lenses() {
            let mut acc = vec![0.0; geom.n_pixels()];
            for off in &offsets {
                let su: Vec<f64> = us.iter().map(|&u| u + off.x).collect();
                let sv: Vec<f64> = vs.iter().map(|&v| v + off.y).collect();
                let mut momenta = Vec::with_capacity(su.len() * sv.len());
                for &v in &sv {
                    for &u in &su {
                        momenta.push(Vec2::new(u, v));
                    }
                }
                let resp = response_inner(basis, geom, i, &momenta, Some((su, sv)))?;
                for j in 0..geom.n_pixels() {
                    let v = resp.column(j).into_owned();
                    let op = MeasurementOperator::from_response_column(&v, i, j);
                    acc[j] += op.expectation(rho_m);
                }
            }
            for (j, a) in acc.iter().enumerate() {
                values.insert((i, j), (a / offsets.len() as f64).max(0.0));
            }
        }
    } else {
        let ops = povm_all(basis, geom)?;
        for op in &ops {
            values.insert(
                (op.lens_index, op.pixel_index),
                op.expectation(rho_m).max(0.0),
            );
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    noise.apply(&mut values, &mut rng);
    let record = IntensityRecord { values, scale: 1.0 };
    record.validate()?;
    Ok(record)
}

/// One phase-space sample of the Gaussian-aperture sensor.
#[derive(Debug, Clone)]
pub struct HusimiSample {
    pub lens_index: usize,
    pub pixel_index: usize,
    /// Position displacement Δx of the sampling Gaussian.
    pub dx: Vec2,
    /// Momentum displacement Δp of the sampling Gaussian.
    pub dp: Vec2,
    pub q: f64,
}

/// Gaussian-aperture sensing: each (Δx_i, Δp_j) value equals the coherent
/// state projection ⟨α|ρ|α⟩ with α ∝ Δx + iΔp, up to one global scale —
/// a direct sampling of the Husimi distribution.
pub fn husimi_sample(rho: &CoherenceMatrix, geom: &SensorGeometry) -> Result<Vec<HusimiSample>> {
    if !matches!(geom.aperture, Aperture::Gaussian { .. }) {
        return Err(Error::Aperture(
            "Husimi sampling requires Gaussian apertures".into(),
        ));
    }
    let record = simulate_intensities(rho, geom, &NoiseSpec::None, 0)?;
    let momenta = geom.pixel_momenta();
    let mut out = Vec::with_capacity(record.values.len());
    for (&(i, j), &q) in &record.values {
        out.push(HusimiSample {
            lens_index: i,
            pixel_index: j,
            dx: geom.lens_centers[i],
            dp: momenta[j],
            q,
        });
    }
    Ok(out)
}
