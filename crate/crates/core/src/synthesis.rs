//! Positive-frequency mode functions `A⁺`, `E⁺ = -∂_t A⁺`, `B⁺ = ∇×A⁺` on a
//! spatial grid.
//!
//! The mode expansion is
//!
//! ```text
//! A⁺(x,t) = i (1/√2) Σ_λ ∫ dk/(2π)^{3/2} ω^{-1/2} c̃_λ(k) e_λ(k) e^{-i(ωt - k·x)}
//! ```
//!
//! with `c̃ = c/(2π)^{3/2}` the δ-normalized amplitude of a spectrum whose norm is
//! `Σ_λ ∫ dk/(2π)³ |c_λ|²`. On the grid `∫ dk → Σ_k Π Δk`, so every sample
//! contributes `i ω^{-1/2} c_λ e_λ · Π Δk / (√2 (2π)³)`. That constant is the
//! single place where the continuum convention meets the FFT sum.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mode_space::{self, Helicity, PhotonSpectrum, WaveVectorGrid};
use crate::spectral::SpectralTransform;
use crate::vector::{self, CVec3, Vec3, C64, CZERO, I};

/// Uniform spatial grid `x = origin + j·Δx`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid {
    n: [usize; 3],
    delta_x: Vec3,
    origin: Vec3,
}

impl SpatialGrid {
    pub fn new(n: [usize; 3], delta_x: Vec3, origin: Vec3) -> Result<Self> {
        if n.contains(&0) || delta_x.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidGrid(format!("bad spatial grid n={n:?} dx={delta_x:?}")));
        }
        Ok(Self { n, delta_x, origin })
    }

    /// FFT partner of a wavevector grid, `Δx = 2π/(N Δk)`, with `x = 0` at
    /// sample `N/2` so packets built around the origin start mid-box.
    pub fn paired(grid: &WaveVectorGrid) -> Self {
        let n = grid.n_per_axis();
        let dk = grid.delta_k();
        let delta_x = [0, 1, 2].map(|a| 2.0 * PI / (n[a] as f64 * dk[a]));
        let origin = [0, 1, 2].map(|a| -((n[a] / 2) as f64) * delta_x[a]);
        Self { n, delta_x, origin }
    }

    pub fn is_paired_with(&self, grid: &WaveVectorGrid) -> bool {
        let dk = grid.delta_k();
        self.n == grid.n_per_axis()
            && (0..3).all(|a| {
                let want = 2.0 * PI / (self.n[a] as f64 * dk[a]);
                (self.delta_x[a] - want).abs() <= 1e-12 * want
            })
    }

    pub fn n_per_axis(&self) -> [usize; 3] {
        self.n
    }

    pub fn delta_x(&self) -> Vec3 {
        self.delta_x
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.delta_x.iter().product()
    }

    pub fn box_lengths(&self) -> Vec3 {
        [0, 1, 2].map(|a| self.n[a] as f64 * self.delta_x[a])
    }

    pub fn volume(&self) -> f64 {
        self.box_lengths().iter().product()
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let iz = idx % self.n[2];
        let rest = idx / self.n[2];
        [rest / self.n[1], rest % self.n[1], iz]
    }

    pub fn point(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        [0, 1, 2].map(|a| self.origin[a] + c[a] as f64 * self.delta_x[a])
    }

    /// Minimum-image displacement `x - y` in the periodic box.
    pub fn periodic_displacement(&self, x: Vec3, y: Vec3) -> Vec3 {
        let l = self.box_lengths();
        [0, 1, 2].map(|a| {
            if self.n[a] == 1 {
                return 0.0;
            }
            let d = x[a] - y[a];
            d - l[a] * (d / l[a]).round()
        })
    }
}

/// Normalization convention of the discrete mode expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExpansionConvention {
    #[default]
    Standard,
    /// Drops the `(2π)^{-3/2}` state factor. Only for fault-injection checks:
    /// every Parseval comparison must reject it.
    MissingStateFactor,
}

impl ExpansionConvention {
    /// Prefactor multiplying `i ω^{-1/2} Σ_λ c_λ e_λ` for one grid sample.
    pub fn sample_factor(self, grid: &WaveVectorGrid) -> f64 {
        let dk: f64 = grid.delta_k().iter().product();
        let expansion = FRAC_1_SQRT_2 * dk / (2.0 * PI).powf(1.5);
        match self {
            ExpansionConvention::Standard => expansion / (2.0 * PI).powf(1.5),
            ExpansionConvention::MissingStateFactor => expansion,
        }
    }
}

/// Coefficient of `e^{ik·x}` in `A⁺(x, t)` for one sample.
fn mode_coefficient(s: &PhotonSpectrum, basis: &mode_space::ModeVectors, idx: usize, t: f64, factor: f64) -> CVec3 {
    let g = s.grid();
    if g.is_masked(idx) {
        return [CZERO; 3];
    }
    let omega = g.omega(idx);
    let amp = I * factor / omega.sqrt() * C64::from_polar(1.0, -omega * t);
    let mut out = [CZERO; 3];
    for h in Helicity::BOTH {
        let c = s.amplitude(h, idx);
        if c == CZERO {
            continue;
        }
        let e = basis.helicity(h);
        for a in 0..3 {
            out[a] += amp * c * e[a];
        }
    }
    out
}

/// Positive-frequency fields at one instant.
#[derive(Clone, Debug)]
pub struct FieldSnapshot {
    pub t: f64,
    grid: Arc<WaveVectorGrid>,
    transform: Arc<SpectralTransform>,
    /// k-space coefficients of `A⁺`, per Cartesian component.
    modes: [Vec<C64>; 3],
    pub a_plus: [Vec<C64>; 3],
    pub e_plus: [Vec<C64>; 3],
    pub b_plus: [Vec<C64>; 3],
}

impl FieldSnapshot {
    pub fn spatial(&self) -> &SpatialGrid {
        self.transform.spatial()
    }

    pub fn wave_grid(&self) -> &WaveVectorGrid {
        &self.grid
    }

    pub fn transform(&self) -> &Arc<SpectralTransform> {
        &self.transform
    }

    pub fn len(&self) -> usize {
        self.a_plus[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn a_at(&self, j: usize) -> CVec3 {
        [self.a_plus[0][j], self.a_plus[1][j], self.a_plus[2][j]]
    }

    pub fn e_at(&self, j: usize) -> CVec3 {
        [self.e_plus[0][j], self.e_plus[1][j], self.e_plus[2][j]]
    }

    pub fn b_at(&self, j: usize) -> CVec3 {
        [self.b_plus[0][j], self.b_plus[1][j], self.b_plus[2][j]]
    }

    /// Mode coefficients of `A⁺`, as a 3-vector per k-sample.
    pub fn mode(&self, idx: usize) -> CVec3 {
        [self.modes[0][idx], self.modes[1][idx], self.modes[2][idx]]
    }

    /// x-space field whose mode coefficients are `m(k, ω, a_k)`.
    pub fn map_modes(&self, m: impl Fn(Vec3, f64, CVec3) -> CVec3) -> [Vec<C64>; 3] {
        let n = self.grid.len();
        let mut out = [vec![CZERO; n], vec![CZERO; n], vec![CZERO; n]];
        for idx in 0..n {
            if self.grid.is_masked(idx) {
                continue;
            }
            let v = m(self.grid.k(idx), self.grid.omega(idx), self.mode(idx));
            for a in 0..3 {
                out[a][idx] = v[a];
            }
        }
        out.map(|c| self.transform.to_x(&c))
    }

    /// Spectral gradient `∂_axis A⁺`.
    pub fn grad_a(&self, axis: usize) -> [Vec<C64>; 3] {
        self.map_modes(|k, _, a| a.map(|v| I * k[axis] * v))
    }
}

pub fn synthesize(s: &PhotonSpectrum, spatial: &SpatialGrid, t: f64) -> Result<FieldSnapshot> {
    if !spatial.is_paired_with(s.grid()) {
        return Err(Error::InvalidGrid("spatial grid is not FFT-paired with the wavevector grid; use synthesize_direct".into()));
    }
    let transform = Arc::new(SpectralTransform::for_grid(s.grid(), spatial));
    synthesize_with(s, &transform, t, ExpansionConvention::Standard)
}

/// Synthesis on a prebuilt transform, so repeated snapshots share FFT plans.
pub fn synthesize_with(
    s: &PhotonSpectrum,
    transform: &Arc<SpectralTransform>,
    t: f64,
    convention: ExpansionConvention,
) -> Result<FieldSnapshot> {
    let g = s.grid();
    if !transform.spatial().is_paired_with(g) || transform.k(0) != g.k(0) {
        return Err(Error::InvalidGrid("transform does not belong to this wavevector grid".into()));
    }
    let basis = mode_space::build_basis(g);
    let factor = convention.sample_factor(g);
    let n = g.len();
    let mut modes = [vec![CZERO; n], vec![CZERO; n], vec![CZERO; n]];
    let mut e_modes = modes.clone();
    let mut b_modes = modes.clone();
    for idx in 0..n {
        let a = mode_coefficient(s, basis.get(idx), idx, t, factor);
        let k = g.k(idx);
        let omega = g.omega(idx);
        // -∂_t e^{-iωt} = iω e^{-iωt};  ∇× e^{ik·x} a = ik × a.
        let curl = vector::ccross(&vector::creal(k), &a).map(|v| I * v);
        for c in 0..3 {
            modes[c][idx] = a[c];
            e_modes[c][idx] = I * omega * a[c];
            b_modes[c][idx] = curl[c];
        }
    }
    let a_plus = modes.clone().map(|m| transform.to_x(&m));
    let e_plus = e_modes.map(|m| transform.to_x(&m));
    let b_plus = b_modes.map(|m| transform.to_x(&m));
    Ok(FieldSnapshot { t, grid: s.grid_arc().clone(), transform: transform.clone(), modes, a_plus, e_plus, b_plus })
}

/// `(A⁺, E⁺, B⁺)` at one point.
pub type PointFields = [CVec3; 3];

/// Direct quadrature of the mode sum at arbitrary points; independent of the FFT path.
pub fn synthesize_direct(s: &PhotonSpectrum, points: &[Vec3], t: f64) -> Vec<PointFields> {
    let g = s.grid();
    let factor = ExpansionConvention::Standard.sample_factor(g);
    let mut out = vec![[[CZERO; 3]; 3]; points.len()];
    for idx in 0..g.len() {
        if g.is_masked(idx) {
            continue;
        }
        let Some(basis) = mode_space::mode_vectors(g.k(idx)) else { continue };
        let a = mode_coefficient(s, &basis, idx, t, factor);
        if a.iter().all(|v| *v == CZERO) {
            continue;
        }
        let k = g.k(idx);
        let omega = g.omega(idx);
        let e = a.map(|v| I * omega * v);
        let b = vector::ccross(&vector::creal(k), &a).map(|v| I * v);
        for (p, slot) in points.iter().zip(out.iter_mut()) {
            let phase = C64::from_polar(1.0, vector::dot(k, *p));
            for c in 0..3 {
                slot[0][c] += a[c] * phase;
                slot[1][c] += e[c] * phase;
                slot[2][c] += b[c] * phase;
            }
        }
    }
    out
}

/// Real (Hermitian) fields `A = A⁺ + A⁻ = 2 Re A⁺` and likewise for E, B.
#[derive(Clone, Debug)]
pub struct RealFields {
    pub a: [Vec<f64>; 3],
    pub e: [Vec<f64>; 3],
    pub b: [Vec<f64>; 3],
}

pub fn real_fields(f: &FieldSnapshot) -> RealFields {
    let re2 = |v: &[Vec<C64>; 3]| -> [Vec<f64>; 3] { [0, 1, 2].map(|c| v[c].iter().map(|z| 2.0 * z.re).collect()) };
    RealFields { a: re2(&f.a_plus), e: re2(&f.e_plus), b: re2(&f.b_plus) }
}

/// Checks `A⁺(z, dt) = A⁺(z - c·dt, 0)` for a spectrum supported on `k ∥ +z`.
///
/// Returns `max |A⁺(z,dt) - A⁺(z - dt, 0)| / max |A⁺(z,dt)|`, with the shift
/// applied spectrally.
pub fn translation_check_1d(s: &PhotonSpectrum, dt: f64) -> Result<f64> {
    let g = s.grid();
    for idx in 0..g.len() {
        let k = g.k(idx);
        let occupied = Helicity::BOTH.iter().any(|h| s.amplitude(*h, idx) != CZERO);
        if occupied && (k[0] != 0.0 || k[1] != 0.0 || k[2] <= 0.0) {
            return Err(Error::NonCollinear);
        }
    }
    if dt == 0.0 {
        return Ok(0.0);
    }
    let spatial = SpatialGrid::paired(g);
    let transform = Arc::new(SpectralTransform::for_grid(g, &spatial));
    let later = synthesize_with(s, &transform, dt, ExpansionConvention::Standard)?;
    let shifted = mode_space::translate(s, [0.0, 0.0, dt]);
    let earlier = synthesize_with(&shifted, &transform, 0.0, ExpansionConvention::Standard)?;
    let mut peak = 0.0f64;
    let mut diff = 0.0f64;
    for c in 0..3 {
        for (a, b) in later.a_plus[c].iter().zip(&earlier.a_plus[c]) {
            peak = peak.max(a.norm());
            diff = diff.max((a - b).norm());
        }
    }
    Ok(if peak > 0.0 { diff / peak } else { 0.0 })
}
