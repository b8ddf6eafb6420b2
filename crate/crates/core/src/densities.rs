//! Photon number, current and mechanical densities built from mode functions,
//! plus the Bialynicki-Birula–Sipe field `F` and the Landau–Peierls field `ψ`.
//!
//! Every density has the bilinear form
//!
//! ```text
//! D_O(x) = σ · [ i E⁺(x)·(Ô A)⁻(x) + c.c. ]         (ε₀/ħ = 1)
//! ```
//!
//! where `Ô` is the quantum-mechanical operator whose expectation the density
//! carries (`1` for number, `-i∂_t` for energy, `i∇` on the negative-frequency
//! part for momentum, `Ω⁻¹∇×` for helicity). The number density is
//! equivalently `σ · [-i A⁺·E⁻ + c.c.]`. The global sign `σ` is calibrated once
//! from a single plane-wave mode, see [`sign_calibration`].
//!
//! The prefactor is `ε₀/ħ` rather than `ε₀/2ħ`: with the mode normalization of
//! [`crate::synthesis`] (the one that makes `∫|ψ|² = 1`) this is what makes
//! `∫ρ_p dx` equal the scalar product of the state with itself.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::{Arc, OnceLock};

use log::info;

use crate::error::{Error, Result};
use crate::mode_space::{Helicity, PhotonSpectrum, WaveVectorGrid};
use crate::spectral::SpectralTransform;
use crate::sum::Neumaier;
use crate::synthesis::{self, FieldSnapshot, SpatialGrid};
use crate::vector::{self, CVec3, Vec3, C64, CZERO, I};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DensityKind {
    Number,
    Current,
    Energy,
    Momentum,
    FourMomentum,
    AngularMomentum,
    OrbitalAngularMomentum,
    SpinAngularMomentum,
    Helicity,
    BbEnergy,
    LpNumber,
}

impl DensityKind {
    pub const ALL: [DensityKind; 11] = [
        DensityKind::Number,
        DensityKind::Current,
        DensityKind::Energy,
        DensityKind::Momentum,
        DensityKind::FourMomentum,
        DensityKind::AngularMomentum,
        DensityKind::OrbitalAngularMomentum,
        DensityKind::SpinAngularMomentum,
        DensityKind::Helicity,
        DensityKind::BbEnergy,
        DensityKind::LpNumber,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DensityKind::Number => "number",
            DensityKind::Current => "current",
            DensityKind::Energy => "energy",
            DensityKind::Momentum => "momentum",
            DensityKind::FourMomentum => "four_momentum",
            DensityKind::AngularMomentum => "angular_momentum",
            DensityKind::OrbitalAngularMomentum => "orbital_angular_momentum",
            DensityKind::SpinAngularMomentum => "spin_angular_momentum",
            DensityKind::Helicity => "helicity",
            DensityKind::BbEnergy => "bb_energy",
            DensityKind::LpNumber => "lp_number",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Natural-unit dimension label used in export headers.
    pub fn units(self) -> &'static str {
        match self {
            DensityKind::Number | DensityKind::LpNumber => "1/length^3",
            DensityKind::Current => "c/length^3",
            DensityKind::Energy | DensityKind::BbEnergy => "hbar*c/length^4",
            DensityKind::Momentum => "hbar/length^4",
            DensityKind::FourMomentum => "hbar/length^4",
            DensityKind::AngularMomentum
            | DensityKind::OrbitalAngularMomentum
            | DensityKind::SpinAngularMomentum
            | DensityKind::Helicity => "hbar/length^3",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityData {
    Scalar(Vec<f64>),
    Vector([Vec<f64>; 3]),
    FourVector([Vec<f64>; 4]),
}

impl DensityData {
    pub fn components(&self) -> Vec<&[f64]> {
        match self {
            DensityData::Scalar(v) => vec![v.as_slice()],
            DensityData::Vector(v) => v.iter().map(|c| c.as_slice()).collect(),
            DensityData::FourVector(v) => v.iter().map(|c| c.as_slice()).collect(),
        }
    }
}

/// A real density sampled on a spatial grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    pub kind: DensityKind,
    pub t: f64,
    pub grid: SpatialGrid,
    pub data: DensityData,
}

impl DensityField {
    /// `∫ D dx` per component (compensated sum times cell volume).
    pub fn integral(&self) -> Vec<f64> {
        let dv = self.grid.cell_volume();
        self.data
            .components()
            .into_iter()
            .map(|c| {
                let mut acc = Neumaier::new();
                c.iter().for_each(|v| acc.add(*v));
                acc.value() * dv
            })
            .collect()
    }

    pub fn scalar(&self) -> Option<&[f64]> {
        match &self.data {
            DensityData::Scalar(v) => Some(v),
            _ => None,
        }
    }

    pub fn vector(&self) -> Option<&[Vec<f64>; 3]> {
        match &self.data {
            DensityData::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn integral3(&self) -> Vec3 {
        let v = self.integral();
        [v[0], v[1], v[2]]
    }

    fn scalar_field(kind: DensityKind, f: &FieldSnapshot, data: Vec<f64>) -> Self {
        Self { kind, t: f.t, grid: f.spatial().clone(), data: DensityData::Scalar(data) }
    }

    fn vector_field(kind: DensityKind, f: &FieldSnapshot, data: [Vec<f64>; 3]) -> Self {
        Self { kind, t: f.t, grid: f.spatial().clone(), data: DensityData::Vector(data) }
    }
}

/// Global signs applied to the literal density expressions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignCalibration {
    /// Sign for number, current, energy, momentum and helicity densities.
    pub number: f64,
    /// Sign for the spin term of the angular momentum density.
    pub spin: f64,
}

static CALIBRATION: OnceLock<SignCalibration> = OnceLock::new();

/// Signs fixed once per process from a single `λ = +1` plane wave along `+z`:
/// the number density of a single mode must be positive and its spin density
/// must point along `λ k̂`.
pub fn sign_calibration() -> SignCalibration {
    *CALIBRATION.get_or_init(|| {
        let cal = calibrate();
        info!("density sign calibration: number σ = {:+}, spin σ = {:+}", cal.number, cal.spin);
        cal
    })
}

fn calibrate() -> SignCalibration {
    let grid = Arc::new(WaveVectorGrid::new([1, 1, 1], [1.0; 3], [0.0, 0.0, 1.0]).expect("valid calibration grid"));
    let mut s = PhotonSpectrum::zeros(grid.clone());
    s.set_amplitude(Helicity::Plus, 0, C64::from(1.0));
    let f = synthesis::synthesize(&s, &SpatialGrid::paired(&grid), 0.0).expect("paired calibration grid");
    let a = f.a_at(0);
    let e = f.e_at(0);
    let number = literal_number(&a, &e);
    let spin = literal_spin(&e, &a)[2];
    SignCalibration { number: number.signum(), spin: spin.signum() }
}

/// `-i X⁺·Y⁻ + c.c.` with `Y⁻ = conj(Y⁺)`.
fn literal_number(a_plus: &CVec3, e_plus: &CVec3) -> f64 {
    2.0 * vector::cdot(a_plus, &vector::cconj(e_plus)).im
}

/// `i X⁺·Y⁻ + c.c.` for an explicit negative-frequency `Y⁻`.
fn kernel(x_plus: &CVec3, y_minus: &CVec3) -> f64 {
    -2.0 * vector::cdot(x_plus, y_minus).im
}

/// `E⁺ × A⁻ + c.c.`
fn literal_spin(e_plus: &CVec3, a_plus: &CVec3) -> Vec3 {
    let v = vector::ccross(e_plus, &vector::cconj(a_plus));
    v.map(|z| 2.0 * z.re)
}

fn component(field: &[Vec<C64>; 3], j: usize) -> CVec3 {
    [field[0][j], field[1][j], field[2][j]]
}

/// Photon number density `ρ_p = σ[-i A⁺·E⁻ + c.c.]`.
pub fn number_density(f: &FieldSnapshot) -> DensityField {
    let sigma = sign_calibration().number;
    let data = (0..f.len()).map(|j| sigma * literal_number(&f.a_at(j), &f.e_at(j))).collect();
    DensityField::scalar_field(DensityKind::Number, f, data)
}

/// Same density from the `E⁺·A⁻` ordering, `σ[i E⁺·A⁻ + c.c.]`.
pub fn number_density_e_ordering(f: &FieldSnapshot) -> DensityField {
    let sigma = sign_calibration().number;
    let data = (0..f.len()).map(|j| sigma * kernel(&f.e_at(j), &vector::cconj(&f.a_at(j)))).collect();
    DensityField::scalar_field(DensityKind::Number, f, data)
}

/// Photon current `J_p = σ[-i A⁺×cB⁻ + c.c.]`.
pub fn photon_current(f: &FieldSnapshot) -> DensityField {
    let sigma = sign_calibration().number;
    let mut data = [vec![0.0; f.len()], vec![0.0; f.len()], vec![0.0; f.len()]];
    for j in 0..f.len() {
        let v = vector::ccross(&f.a_at(j), &vector::cconj(&f.b_at(j)));
        for c in 0..3 {
            data[c][j] = sigma * 2.0 * v[c].im;
        }
    }
    DensityField::vector_field(DensityKind::Current, f, data)
}

/// Energy density `σ Σ_a [i E⁺_a (-i∂_t A_a)⁻ + c.c.]`, with `∂_t A⁻ = -E⁻`.
pub fn energy_density(f: &FieldSnapshot) -> DensityField {
    let sigma = sign_calibration().number;
    let data = (0..f.len())
        .map(|j| {
            let e = f.e_at(j);
            let op_a_minus = vector::cconj(&e).map(|v| I * v);
            sigma * kernel(&e, &op_a_minus)
        })
        .collect();
    DensityField::scalar_field(DensityKind::Energy, f, data)
}

/// Momentum density `σ Σ_a [i E⁺_a (i∇ A_a⁻) + c.c.]`.
pub fn momentum_density(f: &FieldSnapshot) -> DensityField {
    let sigma = sign_calibration().number;
    let grads = [0, 1, 2].map(|axis| f.grad_a(axis));
    let mut data = [vec![0.0; f.len()], vec![0.0; f.len()], vec![0.0; f.len()]];
    for j in 0..f.len() {
        let e = f.e_at(j);
        for axis in 0..3 {
            let op = vector::cconj(&component(&grads[axis], j)).map(|v| I * v);
            data[axis][j] = sigma * kernel(&e, &op);
        }
    }
    DensityField::vector_field(DensityKind::Momentum, f, data)
}

/// `(H, P)` packed as a four-vector density `P^μ` with `ħ = c = 1`.
pub fn four_momentum_density(f: &FieldSnapshot) -> DensityField {
    let h = energy_density(f);
    let p = momentum_density(f);
    let DensityData::Scalar(h) = h.data else { unreachable!() };
    let DensityData::Vector([px, py, pz]) = p.data else { unreachable!() };
    DensityField {
        kind: DensityKind::FourMomentum,
        t: f.t,
        grid: f.spatial().clone(),
        data: DensityData::FourVector([h, px, py, pz]),
    }
}

/// Orbital and spin parts of the angular momentum density about `origin`.
#[derive(Clone, Debug)]
pub struct AngularMomentumDensity {
    pub orbital: DensityField,
    pub spin: DensityField,
    pub total: DensityField,
}

/// Angular momentum density: orbital `σ Σ_a [i E⁺_a ((x-x₀)×i∇ A_a)⁻ + c.c.]`,
/// which reduces pointwise to `(x - x₀) × P(x)`, plus the spin term
/// `σ_s [E⁺ × A⁻ + c.c.]`.
pub fn angular_momentum_density(f: &FieldSnapshot, origin: Vec3) -> AngularMomentumDensity {
    let p = momentum_density(f);
    let p = p.vector().expect("vector density");
    let spin_sign = sign_calibration().spin;
    let grid = f.spatial();
    let n = f.len();
    let mut orbital = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut spin = orbital.clone();
    let mut total = orbital.clone();
    for j in 0..n {
        let r = vector::sub(grid.point(j), origin);
        let l = vector::cross(r, [p[0][j], p[1][j], p[2][j]]);
        let s = literal_spin(&f.e_at(j), &f.a_at(j));
        for c in 0..3 {
            orbital[c][j] = l[c];
            spin[c][j] = spin_sign * s[c];
            total[c][j] = orbital[c][j] + spin[c][j];
        }
    }
    AngularMomentumDensity {
        orbital: DensityField::vector_field(DensityKind::OrbitalAngularMomentum, f, orbital),
        spin: DensityField::vector_field(DensityKind::SpinAngularMomentum, f, spin),
        total: DensityField::vector_field(DensityKind::AngularMomentum, f, total),
    }
}

/// Helicity density `σ Σ_a [i E⁺_a (Ω⁻¹∇×A)_a⁻ + c.c.]`.
pub fn helicity_density(f: &FieldSnapshot) -> DensityField {
    let sigma = sign_calibration().number;
    let op = f.map_modes(|k, omega, a| {
        let curl = vector::ccross(&vector::creal(k), &a).map(|v| I * v);
        curl.map(|v| v / omega)
    });
    let data = (0..f.len()).map(|j| sigma * kernel(&f.e_at(j), &vector::cconj(&component(&op, j)))).collect();
    DensityField::scalar_field(DensityKind::Helicity, f, data)
}

/// Spectral multiplier `(c|k|)^power` on a field whose wavevectors are those
/// of `transform`. The `k = 0` sample is dropped.
pub fn apply_frequency_operator(transform: &SpectralTransform, field: &[C64], power: f64) -> Result<Vec<C64>> {
    let mut coeffs = transform.to_k(field);
    let peak = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let omega = vector::norm(transform.k(idx));
        if omega <= 1e-12 {
            if power < 0.0 && c.norm() > 1e-12 * peak {
                return Err(Error::InvalidArgument(format!(
                    "Ω^{power} is undefined on a field with k = 0 content ({:.3e})",
                    c.norm()
                )));
            }
            *c = CZERO;
        } else {
            *c *= omega.powf(power);
        }
    }
    Ok(transform.to_x(&coeffs))
}

/// `Ω^p X` for a real field `X = X⁺ + X⁻`, using `Ω^p X⁻ = (Ω^p X⁺)*`.
fn frequency_operator_on_real(transform: &SpectralTransform, plus: &[C64], power: f64) -> Result<Vec<C64>> {
    let op = apply_frequency_operator(transform, plus, power)?;
    Ok(op.into_iter().map(|z| C64::from(2.0 * z.re)).collect())
}

/// Bialynicki-Birula–Sipe field `F` and Landau–Peierls field `ψ` of a
/// pure-helicity state.
#[derive(Clone, Debug)]
pub struct PhotonWaveFields {
    pub helicity: Helicity,
    pub t: f64,
    /// `F = √(ε₀/2)(E + iλcB)`.
    pub f: [Vec<C64>; 3],
    /// `ψ = √(ε₀/2ħ)[Ω^{1/2}A - iΩ^{-1/2}E]`.
    pub psi: [Vec<C64>; 3],
    transform: Arc<SpectralTransform>,
}

pub fn photon_wave_fields(f: &FieldSnapshot, s: &PhotonSpectrum) -> Result<PhotonWaveFields> {
    let helicity = s
        .pure_helicity()
        .ok_or_else(|| Error::MixedHelicity("the BB field is defined per helicity; input carries both or neither".into()))?;
    let lambda = helicity.value();
    let t = f.transform();
    let real = synthesis::real_fields(f);
    let n = f.len();
    let mut bb = [vec![CZERO; n], vec![CZERO; n], vec![CZERO; n]];
    let mut psi = bb.clone();
    for c in 0..3 {
        for j in 0..n {
            bb[c][j] = FRAC_1_SQRT_2 * C64::new(real.e[c][j], lambda * real.b[c][j]);
        }
        let sqrt_a = frequency_operator_on_real(t, &f.a_plus[c], 0.5)?;
        let inv_sqrt_e = frequency_operator_on_real(t, &f.e_plus[c], -0.5)?;
        for j in 0..n {
            psi[c][j] = FRAC_1_SQRT_2 * (sqrt_a[j] - I * inv_sqrt_e[j]);
        }
    }
    Ok(PhotonWaveFields { helicity, t: f.t, f: bb, psi, transform: t.clone() })
}

impl PhotonWaveFields {
    /// `‖F - i√ħ Ω^{1/2}ψ‖₂ / ‖F‖₂`.
    pub fn omega_identity_residual(&self) -> Result<f64> {
        let mut num = Neumaier::new();
        let mut den = Neumaier::new();
        for c in 0..3 {
            let op = apply_frequency_operator(&self.transform, &self.psi[c], 0.5)?;
            for (fv, ov) in self.f[c].iter().zip(&op) {
                num.add((fv - I * ov).norm_sqr());
                den.add(fv.norm_sqr());
            }
        }
        Ok((num.value() / den.value()).sqrt())
    }

    fn grid(&self) -> &SpatialGrid {
        self.transform.spatial()
    }

    /// `|F|²`, the BB energy density.
    pub fn bb_energy_density(&self) -> DensityField {
        let data = (0..self.f[0].len()).map(|j| (0..3).map(|c| self.f[c][j].norm_sqr()).sum()).collect();
        DensityField { kind: DensityKind::BbEnergy, t: self.t, grid: self.grid().clone(), data: DensityData::Scalar(data) }
    }

    /// `|ψ|²`, the LP number density.
    pub fn lp_number_density(&self) -> DensityField {
        let data = (0..self.psi[0].len()).map(|j| (0..3).map(|c| self.psi[c][j].norm_sqr()).sum()).collect();
        DensityField { kind: DensityKind::LpNumber, t: self.t, grid: self.grid().clone(), data: DensityData::Scalar(data) }
    }
}

/// Every density of one snapshot, keyed by kind (used by exporters).
pub fn all_densities(f: &FieldSnapshot, s: &PhotonSpectrum, origin: Vec3) -> Result<BTreeMap<DensityKind, DensityField>> {
    let mut out = BTreeMap::new();
    out.insert(DensityKind::Number, number_density(f));
    out.insert(DensityKind::Current, photon_current(f));
    out.insert(DensityKind::Energy, energy_density(f));
    out.insert(DensityKind::Momentum, momentum_density(f));
    out.insert(DensityKind::FourMomentum, four_momentum_density(f));
    let am = angular_momentum_density(f, origin);
    out.insert(DensityKind::AngularMomentum, am.total);
    out.insert(DensityKind::OrbitalAngularMomentum, am.orbital);
    out.insert(DensityKind::SpinAngularMomentum, am.spin);
    out.insert(DensityKind::Helicity, helicity_density(f));
    if s.pure_helicity().is_some() {
        let w = photon_wave_fields(f, s)?;
        out.insert(DensityKind::BbEnergy, w.bb_energy_density());
        out.insert(DensityKind::LpNumber, w.lp_number_density());
    }
    Ok(out)
}

/// Convenience: snapshot of `s` at time `t` on its paired spatial grid.
pub fn snapshot(s: &PhotonSpectrum, t: f64) -> Result<FieldSnapshot> {
    synthesis::synthesize(s, &SpatialGrid::paired(s.grid()), t)
}
