//! # shtomo
//!
//! Shack-Hartmann (SH) coherence tomography toolkit.
//!
//! A Shack-Hartmann sensor — a microlens array focusing onto a detector —
//! performs a simultaneous unsharp measurement of position and transverse
//! momentum. Each (lens, pixel) pair is a rank-one measurement operator
//! acting on the coherence matrix of the incoming beam, so the recorded
//! spot pattern carries far more than local wavefront slopes: it determines
//! the full second-order coherence of the signal.
//!
//! This crate models that measurement chain end to end:
//!
//! - [`field`] — mode bases (plane waves, vortex/OAM beams), coherence
//!   matrices and the scalar metrics (fidelity, purity, intensity) used
//!   throughout.
//! - [`sensor`] — microlens geometry, measurement-operator construction,
//!   intensity simulation under a Born-like rule, and the Gaussian-aperture
//!   limit that samples the Husimi distribution.
//! - [`tomography`] — the linear map from coherence parameters to pixel
//!   intensities, its singular spectrum (dynamical range / informational
//!   completeness), and maximum-likelihood plus linear reconstruction.
//! - [`propagation`] — coherence-aware digital propagation to other planes
//!   and the correlation metric scoring far-field predictions.
//! - [`baseline`] — the classical SH processing chain (centroids → slopes →
//!   zonal wavefront → coherent propagation) kept as a comparator that
//!   demonstrably fails on partially coherent input.
//! - [`scenario`] — config-driven orchestration behind the `shtomo` CLI.
//!
//! Internal units are millimetres for lengths and rad/mm for transverse
//! momenta; config files use mm / nm / mrad and are converted on load.

pub mod baseline;
pub mod config;
pub mod error;
pub mod field;
pub mod io;
pub mod propagation;
pub mod scenario;
pub mod sensor;
pub mod tomography;

pub use error::{Error, Result};
pub use field::{CoherenceMatrix, MixtureSpec, ModeBasis};
pub use sensor::{Aperture, IntensityRecord, MeasurementOperator, NoiseSpec, SensorGeometry};
pub use tomography::{
    HermitianBasis, MlOptions, ReconstructionResult, SingularSpectrum, TomographyMatrix,
};
