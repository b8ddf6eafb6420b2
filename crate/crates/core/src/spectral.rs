//! Discrete Fourier pairing between a wavevector grid and a spatial grid.
//!
//! With `x_j = o + j·Δx`, `k_i = k_min + i·Δk` and `Δx = 2π/(N Δk)` per axis,
//!
//! ```text
//! f(x_j) = Σ_i g_i e^{i k_i·x_j}
//!        = e^{i k_min·j Δx} · IDFT_j[ g_i e^{i k_i·o} ]
//! ```
//!
//! where IDFT is the unnormalized `e^{+2πi ij/N}` transform. `to_k` is the exact
//! inverse. Any band-limited field whose wavevectors sit on the grid is
//! represented without error; content outside `[k_min, k_min + NΔk)` aliases.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftDirection, FftPlanner};

use crate::mode_space::WaveVectorGrid;
use crate::synthesis::SpatialGrid;
use crate::vector::{Vec3, C64};

pub struct SpectralTransform {
    n: [usize; 3],
    delta_k: Vec3,
    k_min: Vec3,
    spatial: SpatialGrid,
    inverse: [Arc<dyn Fft<f64>>; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    /// `e^{i k_a(i) o_a}` per axis.
    pre_phase: [Vec<C64>; 3],
    /// `e^{i k_min,a j Δx_a}` per axis.
    post_phase: [Vec<C64>; 3],
}

impl std::fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTransform")
            .field("n", &self.n)
            .field("delta_k", &self.delta_k)
            .field("k_min", &self.k_min)
            .finish()
    }
}

impl SpectralTransform {
    /// Transform for the samples of `grid` onto the spatial grid it is paired with.
    pub fn for_grid(grid: &WaveVectorGrid, spatial: &SpatialGrid) -> Self {
        Self::new(grid.n_per_axis(), grid.delta_k(), grid.k_min(), spatial.clone())
    }

    /// Transform whose wavevectors are centred on zero, `k ∈ [-N/2, N/2)·Δk`.
    /// Products of fields (densities) live here.
    pub fn centered(spatial: &SpatialGrid) -> Self {
        let n = spatial.n_per_axis();
        let dx = spatial.delta_x();
        let delta_k = [0, 1, 2].map(|a| 2.0 * PI / (n[a] as f64 * dx[a]));
        let k_min = [0, 1, 2].map(|a| -((n[a] / 2) as f64) * delta_k[a]);
        Self::new(n, delta_k, k_min, spatial.clone())
    }

    pub fn new(n: [usize; 3], delta_k: Vec3, k_min: Vec3, spatial: SpatialGrid) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let inverse = n.map(|m| planner.plan_fft(m, FftDirection::Inverse));
        let forward = n.map(|m| planner.plan_fft(m, FftDirection::Forward));
        let origin = spatial.origin();
        let dx = spatial.delta_x();
        let pre_phase =
            [0, 1, 2].map(|a| (0..n[a]).map(|i| C64::from_polar(1.0, (k_min[a] + i as f64 * delta_k[a]) * origin[a])).collect());
        let post_phase = [0, 1, 2].map(|a| (0..n[a]).map(|j| C64::from_polar(1.0, k_min[a] * j as f64 * dx[a])).collect());
        Self { n, delta_k, k_min, spatial, inverse, forward, pre_phase, post_phase }
    }

    pub fn spatial(&self) -> &SpatialGrid {
        &self.spatial
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn k(&self, idx: usize) -> Vec3 {
        let iz = idx % self.n[2];
        let rest = idx / self.n[2];
        let c = [rest / self.n[1], rest % self.n[1], iz];
        [0, 1, 2].map(|a| self.k_min[a] + c[a] as f64 * self.delta_k[a])
    }

    /// `f(x_j) = Σ_i g_i e^{i k_i·x_j}`.
    pub fn to_x(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut data = coeffs.to_vec();
        self.apply_phase(&mut data, &self.pre_phase, false);
        self.transform(&mut data, &self.inverse);
        self.apply_phase(&mut data, &self.post_phase, false);
        data
    }

    /// Inverse of [`to_x`](Self::to_x).
    pub fn to_k(&self, field: &[C64]) -> Vec<C64> {
        let mut data = field.to_vec();
        self.apply_phase(&mut data, &self.post_phase, true);
        self.transform(&mut data, &self.forward);
        self.apply_phase(&mut data, &self.pre_phase, true);
        let inv = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= inv;
        }
        data
    }

    fn apply_phase(&self, data: &mut [C64], phase: &[Vec<C64>; 3], conj: bool) {
        let [nx, ny, nz] = self.n;
        for ix in 0..nx {
            for iy in 0..ny {
                let pxy = phase[0][ix] * phase[1][iy];
                let row = &mut data[(ix * ny + iy) * nz..(ix * ny + iy + 1) * nz];
                for (iz, v) in row.iter_mut().enumerate() {
                    let p = pxy * phase[2][iz];
                    *v *= if conj { p.conj() } else { p };
                }
            }
        }
    }

    fn transform(&self, data: &mut [C64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [nx, ny, nz] = self.n;
        if nz > 1 {
            plans[2].process(data);
        }
        let mut line = Vec::new();
        if ny > 1 {
            line.resize(ny, C64::default());
            for ix in 0..nx {
                for iz in 0..nz {
                    for iy in 0..ny {
                        line[iy] = data[(ix * ny + iy) * nz + iz];
                    }
                    plans[1].process(&mut line);
                    for iy in 0..ny {
                        data[(ix * ny + iy) * nz + iz] = line[iy];
                    }
                }
            }
        }
        if nx > 1 {
            line.resize(nx, C64::default());
            for iy in 0..ny {
                for iz in 0..nz {
                    for ix in 0..nx {
                        line[ix] = data[(ix * ny + iy) * nz + iz];
                    }
                    plans[0].process(&mut line);
                    for ix in 0..nx {
                        data[(ix * ny + iy) * nz + iz] = line[ix];
                    }
                }
            }
        }
    }

    /// Multiplies the spectrum of `field` by `m(k)` and returns the result in x-space.
    pub fn apply_multiplier(&self, field: &[C64], m: impl Fn(Vec3) -> C64) -> Vec<C64> {
        let mut coeffs = self.to_k(field);
        for (idx, c) in coeffs.iter_mut().enumerate() {
            *c *= m(self.k(idx));
        }
        self.to_x(&coeffs)
    }

    /// Spectral derivative `∂_a` of a field.
    pub fn derivative(&self, field: &[C64], axis: usize) -> Vec<C64> {
        self.apply_multiplier(field, |k| C64::new(0.0, k[axis]))
    }

    /// Spectral divergence of a real vector field.
    pub fn divergence(&self, field: &[Vec<f64>; 3]) -> Vec<f64> {
        let mut total = vec![C64::default(); self.len()];
        for (a, comp) in field.iter().enumerate() {
            let c: Vec<C64> = comp.iter().map(|v| C64::from(*v)).collect();
            for (t, d) in total.iter_mut().zip(self.derivative(&c, a)) {
                *t += d;
            }
        }
        total.into_iter().map(|z| z.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector;

    fn setup() -> (WaveVectorGrid, SpatialGrid) {
        let g = WaveVectorGrid::new([6, 4, 8], [0.7, 0.9, 0.5], [-1.3, 2.0, 0.25]).unwrap();
        let s = SpatialGrid::paired(&g);
        (g, s)
    }

    #[test]
    fn to_x_matches_direct_sum() {
        let (g, s) = setup();
        let t = SpectralTransform::for_grid(&g, &s);
        let coeffs: Vec<C64> = (0..g.len()).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let field = t.to_x(&coeffs);
        for j in [0, 5, 17, 101, s.len() - 1] {
            let x = s.point(j);
            let direct: C64 = (0..g.len()).map(|i| coeffs[i] * C64::from_polar(1.0, vector::dot(g.k(i), x))).sum();
            assert!((field[j] - direct).norm() <= 1e-12 * g.len() as f64);
        }
        let back = t.to_k(&field);
        for (a, b) in back.iter().zip(&coeffs) {
            assert!((a - b).norm() <= 1e-13);
        }
    }

    #[test]
    fn centered_derivative_of_a_plane_wave() {
        let (_, s) = setup();
        let t = SpectralTransform::centered(&s);
        let k = t.k(t.len() / 3);
        let f: Vec<C64> = (0..s.len()).map(|j| C64::from_polar(1.0, vector::dot(k, s.point(j)))).collect();
        let d = t.derivative(&f, 2);
        for (dv, fv) in d.iter().zip(&f) {
            assert!((dv - C64::new(0.0, k[2]) * fv).norm() <= 1e-12);
        }
    }
}
