//! Browser bindings for the static demo in `www/`.
//!
//! Three operations, each returning a flat `Float64Array`:
//! a density slice through a packet, on-axis profiles of `ρ_p`, `|F|²` and
//! `|ψ|²`, and the retarded vector potential of an oscillating dipole.

use std::sync::Arc;

use photon_lab::densities::{self, DensityKind};
use photon_lab::mode_space::{self, PhotonSpectrum, WaveVectorGrid};
use photon_lab::retarded::{self, EvalPoints, RetardedOptions};
use photon_lab::synthesis::SpatialGrid;
use photon_lab::vector::C64;
use wasm_bindgen::prelude::*;

/// Samples per axis of the demo grid.
pub const N: usize = 32;
const DK: f64 = 0.5;

fn err(e: photon_lab::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn packet(k0: f64, sigma: f64, helicity: i32) -> Result<PhotonSpectrum, JsError> {
    let k = [0.0, 0.0, k0];
    let grid = Arc::new(WaveVectorGrid::straddled([N; 3], [DK; 3], k).map_err(err)?);
    let w = if helicity >= 0 { [C64::from(1.0), C64::from(0.0)] } else { [C64::from(0.0), C64::from(1.0)] };
    mode_space::polarized_gaussian_spectrum(grid, k, sigma, w).map_err(err)
}

/// Grid spacing of the demo's spatial grid.
#[wasm_bindgen]
pub fn spacing() -> f64 {
    2.0 * std::f64::consts::PI / (N as f64 * DK)
}

#[wasm_bindgen]
pub fn grid_size() -> usize {
    N
}

/// `N×N` slice of a scalar density in the `y = 0` plane, row-major in `(x, z)`.
/// `kind` is `number`, `energy`, `helicity`, `bb_energy` or `lp_number`.
#[wasm_bindgen]
pub fn density_slice(kind: &str, k0: f64, sigma: f64, helicity: i32, t: f64) -> Result<Vec<f64>, JsError> {
    let kind = DensityKind::parse(kind).ok_or_else(|| JsError::new(&format!("unknown density {kind}")))?;
    let s = packet(k0, sigma, helicity)?;
    let f = densities::snapshot(&s, t).map_err(err)?;
    let d = densities::all_densities(&f, &s, [0.0; 3])
        .map_err(err)?
        .remove(&kind)
        .ok_or_else(|| JsError::new("density unavailable"))?;
    let values = d.scalar().ok_or_else(|| JsError::new("not a scalar density"))?;
    let g = &d.grid;
    let mut out = Vec::with_capacity(N * N);
    for ix in 0..N {
        for iz in 0..N {
            out.push(values[g.index([ix, N / 2, iz])]);
        }
    }
    Ok(out)
}

/// Three `N`-sample profiles along `z` through the box centre: `ρ_p`, `|F|²`, `|ψ|²`,
/// each scaled to a peak of 1.
#[wasm_bindgen]
pub fn axis_profiles(k0: f64, sigma: f64, helicity: i32, t: f64) -> Result<Vec<f64>, JsError> {
    let s = packet(k0, sigma, helicity)?;
    let f = densities::snapshot(&s, t).map_err(err)?;
    let w = densities::photon_wave_fields(&f, &s).map_err(err)?;
    let mut out = Vec::with_capacity(3 * N);
    for d in [densities::number_density(&f), w.bb_energy_density(), w.lp_number_density()] {
        let v = d.scalar().expect("scalar density");
        let line: Vec<f64> = (0..N).map(|iz| v[d.grid.index([N / 2, N / 2, iz])]).collect();
        let peak = line.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        out.extend(line.iter().map(|x| x / peak));
    }
    Ok(out)
}

/// `|A|` of a `z`-directed dipole (radius 0.2, frequency `omega`) on an
/// `m×m` grid in the `y = 0` plane spanning `[-extent, extent]²`, row-major in `(x, z)`.
#[wasm_bindgen]
pub fn dipole_potential(omega: f64, t: f64, m: usize, extent: f64) -> Result<Vec<f64>, JsError> {
    if m < 2 || !(extent > 0.0) {
        return Err(JsError::new("need m >= 2 and extent > 0"));
    }
    let (a, h, dt): (f64, f64, f64) = (0.2, 0.05, 0.05);
    let n = (2.0 * a / h).ceil() as usize + 6;
    let o = -0.5 * (n - 1) as f64 * h;
    let reach = extent * std::f64::consts::SQRT_2 + 1.0;
    let t0 = t - reach;
    let n_t = (reach / dt).ceil() as usize + 2;
    let src = retarded::dipole_source(SpatialGrid::new([n; 3], [h; 3], [o; 3]).map_err(err)?, a, 1.0, omega, t0, dt, n_t)
        .map_err(err)?;
    let step = 2.0 * extent / (m - 1) as f64;
    let pts = (0..m).flat_map(|i| (0..m).map(move |k| [-extent + i as f64 * step, 0.0, -extent + k as f64 * step])).collect();
    let opts = RetardedOptions { threads: 1, ..Default::default() };
    let pf = retarded::retarded_potential(&src, EvalPoints::Scattered(pts), &[t], &opts).map_err(err)?;
    Ok((0..m * m)
        .map(|j| {
            let v = pf.vector_potential(0, j);
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_has_unit_mass_scale() {
        let s = density_slice("number", 6.0, 1.0, 1, 0.0).unwrap();
        assert_eq!(s.len(), N * N);
        let peak = s.iter().cloned().fold(f64::MIN, f64::max);
        assert!(peak > 0.0 && peak.is_finite());
    }

    #[test]
    fn profiles_peak_at_one() {
        let p = axis_profiles(6.0, 1.0, -1, 0.0).unwrap();
        assert_eq!(p.len(), 3 * N);
        for chunk in p.chunks(N) {
            let peak = chunk.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!((peak - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dipole_field_decays() {
        let v = dipole_potential(2.0, 0.0, 9, 4.0).unwrap();
        assert_eq!(v.len(), 81);
        // Corner (far) is weaker than next to the source.
        assert!(v[0] < v[4 * 9 + 5]);
    }
}
