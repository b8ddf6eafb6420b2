//! Numerical laboratory for second-quantized single-photon states.
//!
//! A [`PhotonSpectrum`](mode_space::PhotonSpectrum) holds the helicity
//! amplitudes `c_λ(k)` of one photon. From it the crate synthesizes the
//! positive-frequency mode functions on an FFT-paired spatial grid, builds the
//! photon number, current and mechanical densities, and checks them against
//! k-space quadratures. Independent pieces cover Fock-space ladder algebra and
//! the retarded-potential solution of the inhomogeneous wave equation.
//!
//! Natural units (ħ = c = ε₀ = 1) are used throughout; see [`units`] for the SI
//! scale factors applied on export.

pub mod densities;
pub mod error;
pub mod fock;
pub mod mode_space;
pub mod observables;
pub mod retarded;
pub mod runner;
pub mod selftest;
pub mod spectral;
pub mod sum;
pub mod synthesis;
pub mod units;
pub mod vector;

pub use error::{Error, Result};
