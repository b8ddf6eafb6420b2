//! Wavevector grids, helicity bases and single-photon spectra.
//!
//! Everything here works in natural units (ħ = c = ε₀ = 1). A spectrum stores
//! the amplitudes `c_λ(k)` for both helicities on a uniform Cartesian grid;
//! integrals over k use the cell weight `Π Δk / (2π)³`.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;

use crate::error::{Error, Result};
use crate::sum::{ComplexNeumaier, Neumaier};
use crate::vector::{self, CVec3, Vec3, C64, CZERO};

/// Transverse helicity label, `λ = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub const BOTH: [Helicity; 2] = [Helicity::Plus, Helicity::Minus];

    pub fn value(self) -> f64 {
        match self {
            Helicity::Plus => 1.0,
            Helicity::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Helicity::Plus => 0,
            Helicity::Minus => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Helicity::Plus => Helicity::Minus,
            Helicity::Minus => Helicity::Plus,
        }
    }
}

/// Uniform Cartesian grid of wavevectors `k = k_min + i·Δk`.
///
/// Samples where `|k| = 0` are masked: the mode expansion carries `ω^{-1/2}`
/// and only propagating modes exist there.
#[derive(Clone, Debug)]
pub struct WaveVectorGrid {
    n: [usize; 3],
    delta_k: Vec3,
    k_min: Vec3,
    mask: Vec<bool>,
}

impl PartialEq for WaveVectorGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.delta_k == other.delta_k && self.k_min == other.k_min
    }
}

impl WaveVectorGrid {
    pub fn new(n: [usize; 3], delta_k: Vec3, k_min: Vec3) -> Result<Self> {
        if n.contains(&0) {
            return Err(Error::InvalidGrid(format!("n_per_axis must be positive, got {n:?}")));
        }
        if delta_k.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidGrid(format!("delta_k must be positive, got {delta_k:?}")));
        }
        if k_min.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("k_min must be finite, got {k_min:?}")));
        }
        let len = n[0] * n[1] * n[2];
        let tiny = 1e-12 * delta_k.iter().cloned().fold(0.0, f64::max);
        let mut grid = Self { n, delta_k, k_min, mask: Vec::new() };
        grid.mask = (0..len).map(|idx| vector::norm(grid.k(idx)) <= tiny).collect();
        Ok(grid)
    }

    /// Grid with `n` samples per axis whose sample `n/2` sits exactly on `center`.
    pub fn centered(n: [usize; 3], delta_k: Vec3, center: Vec3) -> Result<Self> {
        let k_min = [0, 1, 2].map(|a| center[a] - (n[a] / 2) as f64 * delta_k[a]);
        Self::new(n, delta_k, k_min)
    }

    /// Grid whose samples sit symmetrically about `center`. For even `n` no
    /// sample lies on the centre lines; with a centre on the `z` axis this keeps
    /// samples off the `k_x = k_y = 0` line, where the helicity vectors wind.
    pub fn straddled(n: [usize; 3], delta_k: Vec3, center: Vec3) -> Result<Self> {
        let k_min = [0, 1, 2].map(|a| center[a] - 0.5 * n[a].saturating_sub(1) as f64 * delta_k[a]);
        Self::new(n, delta_k, k_min)
    }

    pub fn n_per_axis(&self) -> [usize; 3] {
        self.n
    }

    pub fn delta_k(&self) -> Vec3 {
        self.delta_k
    }

    pub fn k_min(&self) -> Vec3 {
        self.k_min
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let iz = idx % self.n[2];
        let rest = idx / self.n[2];
        [rest / self.n[1], rest % self.n[1], iz]
    }

    pub fn k(&self, idx: usize) -> Vec3 {
        let c = self.coords(idx);
        [0, 1, 2].map(|a| self.k_min[a] + c[a] as f64 * self.delta_k[a])
    }

    /// `ω_k = c|k|` (c = 1).
    pub fn omega(&self, idx: usize) -> f64 {
        vector::norm(self.k(idx))
    }

    pub fn is_masked(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn unmasked_count(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    /// Integration weight `Π Δk / (2π)³` of one sample.
    pub fn cell_weight(&self) -> f64 {
        self.delta_k.iter().product::<f64>() / (2.0 * PI).powi(3)
    }

    /// Whether `k` lies inside the sampled box (inclusive of the last sample).
    pub fn covers(&self, k: Vec3) -> bool {
        (0..3).all(|a| {
            let lo = self.k_min[a];
            let hi = lo + (self.n[a] - 1) as f64 * self.delta_k[a];
            let slack = 1e-12 * self.delta_k[a];
            k[a] >= lo - slack && k[a] <= hi + slack
        })
    }

    /// Index of the masked `k = 0` sample, if the grid contains one.
    pub fn zero_index(&self) -> Option<usize> {
        self.mask.iter().position(|m| *m)
    }

    /// Largest `ω` over unmasked samples.
    pub fn omega_max(&self) -> f64 {
        (0..self.len()).map(|i| self.omega(i)).fold(0.0, f64::max)
    }
}

/// Spherical unit vectors and helicity vectors at one wavevector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeVectors {
    pub e_par: Vec3,
    pub e_theta: Vec3,
    pub e_phi: Vec3,
    /// `e_λ` indexed by [`Helicity::index`].
    pub e_hel: [CVec3; 2],
}

impl ModeVectors {
    pub const ZERO: ModeVectors = ModeVectors { e_par: [0.0; 3], e_theta: [0.0; 3], e_phi: [0.0; 3], e_hel: [[CZERO; 3]; 2] };

    pub fn helicity(&self, h: Helicity) -> &CVec3 {
        &self.e_hel[h.index()]
    }
}

/// Helicity basis `e_λ = (e_θ + iλ e_φ)/√2` for a nonzero `k`.
///
/// On the polar axis the azimuth is taken as zero, which gives
/// `e_θ = (±1, 0, 0)` and `e_φ = (0, 1, 0)` for `k ∥ ±z`.
pub fn mode_vectors(k: Vec3) -> Option<ModeVectors> {
    let kn = vector::norm(k);
    if !(kn > 0.0) {
        return None;
    }
    let rho = k[0].hypot(k[1]);
    let (cos_t, sin_t) = (k[2] / kn, rho / kn);
    let (cos_p, sin_p) = if rho <= 1e-14 * kn { (1.0, 0.0) } else { (k[0] / rho, k[1] / rho) };
    let e_par = [sin_t * cos_p, sin_t * sin_p, cos_t];
    let e_theta = [cos_t * cos_p, cos_t * sin_p, -sin_t];
    let e_phi = [-sin_p, cos_p, 0.0];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let hel = |lambda: f64| -> CVec3 { [0, 1, 2].map(|a| C64::new(s * e_theta[a], s * lambda * e_phi[a])) };
    // Exactly along the axis e_par must be the unit vector itself.
    let e_par = if rho <= 1e-14 * kn { [0.0, 0.0, cos_t.signum()] } else { e_par };
    Some(ModeVectors { e_par, e_theta, e_phi, e_hel: [hel(1.0), hel(-1.0)] })
}

/// Helicity basis for every sample of a grid; masked samples get zero vectors.
#[derive(Clone, Debug)]
pub struct PolarizationBasis {
    vectors: Vec<ModeVectors>,
}

impl PolarizationBasis {
    pub fn get(&self, idx: usize) -> &ModeVectors {
        &self.vectors[idx]
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn build_basis(grid: &WaveVectorGrid) -> PolarizationBasis {
    let vectors = (0..grid.len())
        .map(|idx| if grid.is_masked(idx) { ModeVectors::ZERO } else { mode_vectors(grid.k(idx)).unwrap_or(ModeVectors::ZERO) })
        .collect();
    PolarizationBasis { vectors }
}

/// Single-photon state: amplitudes `c_λ(k)` on a wavevector grid.
#[derive(Clone, Debug)]
pub struct PhotonSpectrum {
    grid: Arc<WaveVectorGrid>,
    amplitudes: [Vec<C64>; 2],
    physical: bool,
}

impl PhotonSpectrum {
    /// Builds a spectrum from raw amplitudes; masked samples are zeroed.
    pub fn from_amplitudes(grid: Arc<WaveVectorGrid>, plus: Vec<C64>, minus: Vec<C64>) -> Result<Self> {
        if plus.len() != grid.len() || minus.len() != grid.len() {
            return Err(Error::InvalidArgument(format!("amplitude arrays must have {} entries", grid.len())));
        }
        let mut amplitudes = [plus, minus];
        for arr in amplitudes.iter_mut() {
            for (idx, c) in arr.iter_mut().enumerate() {
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Err(Error::InvalidArgument(format!("non-finite amplitude at sample {idx}")));
                }
                if grid.is_masked(idx) {
                    *c = CZERO;
                }
            }
        }
        Ok(Self { grid, amplitudes, physical: true })
    }

    pub fn zeros(grid: Arc<WaveVectorGrid>) -> Self {
        let n = grid.len();
        Self { grid, amplitudes: [vec![CZERO; n], vec![CZERO; n]], physical: true }
    }

    pub fn grid(&self) -> &WaveVectorGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<WaveVectorGrid> {
        &self.grid
    }

    pub fn amplitudes(&self, h: Helicity) -> &[C64] {
        &self.amplitudes[h.index()]
    }

    pub fn amplitude(&self, h: Helicity, idx: usize) -> C64 {
        self.amplitudes[h.index()][idx]
    }

    /// Sets one amplitude; writes to masked samples are ignored.
    pub fn set_amplitude(&mut self, h: Helicity, idx: usize, value: C64) {
        if !self.grid.is_masked(idx) {
            self.amplitudes[h.index()][idx] = value;
        }
    }

    /// `false` for band-limited stand-ins of the (non-normalizable) localized basis.
    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn norm(&self) -> f64 {
        scalar_product(self, self).map(|z| z.re).unwrap_or(f64::NAN)
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// The helicity carrying all nonzero amplitude, if there is exactly one.
    pub fn pure_helicity(&self) -> Option<Helicity> {
        let occupied: Vec<Helicity> =
            Helicity::BOTH.into_iter().filter(|h| self.amplitudes[h.index()].iter().any(|c| *c != CZERO)).collect();
        match occupied.as_slice() {
            [h] => Some(*h),
            _ => None,
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for arr in out.amplitudes.iter_mut() {
            for c in arr.iter_mut() {
                *c *= factor;
            }
        }
        out
    }

    /// `α·self + β·other` on the same grid.
    pub fn combine(&self, alpha: C64, other: &Self, beta: C64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        for h in 0..2 {
            for (c, d) in out.amplitudes[h].iter_mut().zip(&other.amplitudes[h]) {
                *c = alpha * *c + beta * *d;
            }
        }
        out.physical = self.physical && other.physical;
        Ok(out)
    }

    /// Same spectrum with every amplitude moved from `k` to `-k` with the
    /// helicity flipped (spatial inversion). Requires the grid to be
    /// symmetric about the origin.
    pub fn parity_mirror(&self) -> Result<Self> {
        let g = &self.grid;
        let n = g.n_per_axis();
        for a in 0..3 {
            let hi = g.k_min()[a] + (n[a] - 1) as f64 * g.delta_k()[a];
            if (hi + g.k_min()[a]).abs() > 1e-12 * g.delta_k()[a] {
                return Err(Error::InvalidGrid("grid is not symmetric about k = 0".into()));
            }
        }
        let mut out = Self::zeros(self.grid.clone());
        for idx in 0..g.len() {
            let c = g.coords(idx);
            let mirrored = g.index([n[0] - 1 - c[0], n[1] - 1 - c[1], n[2] - 1 - c[2]]);
            for h in Helicity::BOTH {
                out.amplitudes[h.flipped().index()][mirrored] = self.amplitudes[h.index()][idx];
            }
        }
        Ok(out)
    }
}

/// k-space expectation values of a spectrum (natural units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSummary {
    pub number: f64,
    pub energy: f64,
    pub momentum: Vec3,
    pub helicity: f64,
}

fn check_weights(w: [C64; 2]) -> Result<()> {
    if w.iter().all(|c| *c == CZERO) {
        return Err(Error::InvalidArgument("helicity weights are both zero".into()));
    }
    if w.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidArgument("helicity weights must be finite".into()));
    }
    Ok(())
}

/// Normalized Gaussian packet `c_λ(k) = w_λ exp(-|k - k0|² / (4σ²))`.
pub fn gaussian_spectrum(grid: Arc<WaveVectorGrid>, k0: Vec3, sigma: f64, weights: [C64; 2]) -> Result<PhotonSpectrum> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    check_weights(weights)?;
    if !grid.covers(k0) {
        return Err(Error::InvalidArgument(format!("k0 = {k0:?} lies outside the grid")));
    }
    if vector::norm(k0) < 5.0 * sigma {
        warn!("|k0| = {} is below 5σ = {}; packet is not collimated", vector::norm(k0), 5.0 * sigma);
    }
    let mut s = PhotonSpectrum::zeros(grid.clone());
    for idx in 0..grid.len() {
        if grid.is_masked(idx) {
            continue;
        }
        let d = vector::sub(grid.k(idx), k0);
        let env = (-vector::dot(d, d) / (4.0 * sigma * sigma)).exp();
        for h in Helicity::BOTH {
            s.amplitudes[h.index()][idx] = weights[h.index()] * env;
        }
    }
    normalize(&s)
}

/// Gaussian packet with a fixed polarization: `c_λ(k) = w_λ exp(-|k - k0|²/(4σ²))
/// e_λ(k)*·e_λ(k0)`. The overlap factor cancels the azimuthal winding of the
/// helicity vectors, so the field is smooth in `k` and the packet has no vortex
/// core or algebraic transverse tails.
pub fn polarized_gaussian_spectrum(grid: Arc<WaveVectorGrid>, k0: Vec3, sigma: f64, weights: [C64; 2]) -> Result<PhotonSpectrum> {
    let base = gaussian_spectrum(grid, k0, sigma, weights)?;
    let reference = mode_vectors(k0).ok_or_else(|| Error::InvalidArgument("k0 must be nonzero".into()))?;
    let g = base.grid.clone();
    let mut s = base;
    for idx in 0..g.len() {
        let Some(mv) = (!g.is_masked(idx)).then(|| mode_vectors(g.k(idx))).flatten() else { continue };
        for h in Helicity::BOTH {
            let overlap = vector::hdot(mv.helicity(h), reference.helicity(h));
            s.amplitudes[h.index()][idx] *= overlap;
        }
    }
    normalize(&s)
}

/// Rescales so that `Σ_λ ∫ dk/(2π)³ |c_λ|² = 1`.
pub fn normalize(s: &PhotonSpectrum) -> Result<PhotonSpectrum> {
    let n = s.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Unnormalizable);
    }
    let mut out = s.scaled(C64::from(1.0 / n.sqrt()));
    // A second pass removes the rounding left by the first rescale.
    let n2 = out.norm();
    out = out.scaled(C64::from(1.0 / n2.sqrt()));
    out.physical = s.physical;
    Ok(out)
}

/// `Σ_λ ∫ dk/(2π)³ c₁λ*(k) c₂λ(k)`, conjugate-linear in the first argument.
pub fn scalar_product(s1: &PhotonSpectrum, s2: &PhotonSpectrum) -> Result<C64> {
    if s1.grid != s2.grid {
        return Err(Error::GridMismatch);
    }
    let mut acc = ComplexNeumaier::default();
    for h in 0..2 {
        for (a, b) in s1.amplitudes[h].iter().zip(&s2.amplitudes[h]) {
            acc.add(a.conj() * b);
        }
    }
    Ok(acc.value() * s1.grid.cell_weight())
}

/// Band-limited stand-in for the exactly localized state at `x0`:
/// `c_λ(k) = e^{-ik·x0}` for both helicities. Not normalizable.
pub fn localized_spectrum(grid: Arc<WaveVectorGrid>, x0: Vec3) -> PhotonSpectrum {
    let mut s = PhotonSpectrum::zeros(grid.clone());
    for idx in 0..grid.len() {
        if grid.is_masked(idx) {
            continue;
        }
        let phase = C64::from_polar(1.0, -vector::dot(grid.k(idx), x0));
        s.amplitudes[0][idx] = phase;
        s.amplitudes[1][idx] = phase;
    }
    s.physical = false;
    s
}

/// Free evolution `c_λ(k) → c_λ(k) e^{-iω_k dt}`.
pub fn evolve(s: &PhotonSpectrum, dt: f64) -> PhotonSpectrum {
    let mut out = s.clone();
    if dt == 0.0 {
        return out;
    }
    for idx in 0..s.grid.len() {
        let phase = C64::from_polar(1.0, -s.grid.omega(idx) * dt);
        for h in 0..2 {
            out.amplitudes[h][idx] *= phase;
        }
    }
    out
}

/// Spatial translation by `d`: `c_λ(k) → c_λ(k) e^{-ik·d}`.
pub fn translate(s: &PhotonSpectrum, d: Vec3) -> PhotonSpectrum {
    let mut out = s.clone();
    for idx in 0..s.grid.len() {
        let phase = C64::from_polar(1.0, -vector::dot(s.grid.k(idx), d));
        for h in 0..2 {
            out.amplitudes[h][idx] *= phase;
        }
    }
    out
}

/// `Σ_λ ∫ dk/(2π)³ |c_λ(k)|² f(k, λ)` for a vector-valued weight.
pub fn spectral_average(s: &PhotonSpectrum, f: impl Fn(Vec3, f64) -> Vec3) -> Vec3 {
    let mut acc = [Neumaier::new(); 3];
    let g = &s.grid;
    for idx in 0..g.len() {
        if g.is_masked(idx) {
            continue;
        }
        let k = g.k(idx);
        for h in Helicity::BOTH {
            let p = s.amplitudes[h.index()][idx].norm_sqr();
            if p == 0.0 {
                continue;
            }
            let v = f(k, h.value());
            for a in 0..3 {
                acc[a].add(p * v[a]);
            }
        }
    }
    let w = g.cell_weight();
    acc.map(|a| a.value() * w)
}

pub fn spectral_summary(s: &PhotonSpectrum) -> SpectralSummary {
    let number = s.norm();
    let [energy, helicity, _] = spectral_average(s, |k, lambda| [vector::norm(k), lambda, 0.0]);
    let momentum = spectral_average(s, |k, _| k);
    SpectralSummary { number, energy, momentum, helicity }
}

/// k-space value of `∫ J_p dx`: `Σ_λ ∫ dk/(2π)³ |c|² c·e_k`.
pub fn spectral_current(s: &PhotonSpectrum) -> Vec3 {
    spectral_average(s, |k, _| vector::scale(1.0 / vector::norm(k), k))
}

/// k-space value of the spin integral: `Σ_λ ∫ dk/(2π)³ |c|² λ e_k`.
pub fn spectral_spin(s: &PhotonSpectrum) -> Vec3 {
    spectral_average(s, |k, lambda| vector::scale(lambda / vector::norm(k), k))
}

/// Multiplies every amplitude by `e^{i·phase}`.
pub fn global_phase(s: &PhotonSpectrum, phase: f64) -> PhotonSpectrum {
    s.scaled(C64::from_polar(1.0, phase))
}
