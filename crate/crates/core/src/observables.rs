//! Expectation values and transport diagnostics computed from densities.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use log::{info, warn};

use crate::densities::{self, DensityField, DensityKind};
use crate::error::{Error, Result};
use crate::mode_space::PhotonSpectrum;
use crate::spectral::SpectralTransform;
use crate::sum::{ComplexNeumaier, Neumaier};
use crate::synthesis::SpatialGrid;
use crate::vector::{self, Vec3, C64};

/// Fraction of the box length, on each side of a periodic axis, that a packet
/// must stay out of for centroid tracking to be trusted.
pub const GUARD_FRACTION: f64 = 0.1;
/// Largest mass fraction tolerated inside the guard band.
pub const GUARD_MASS: f64 = 1e-3;
/// Mass fraction enclosed by the reported localization radius.
pub const WIDTH_MASS: f64 = 0.99;

/// 99% mass radius of one density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalizationWidth {
    pub radius: f64,
    pub centroid: Vec3,
    /// Set when the ball of that radius does not fit in the box.
    pub box_limited: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableReport {
    pub number: f64,
    pub energy: f64,
    pub momentum: Vec3,
    pub helicity: f64,
    pub mean_position: Vec3,
    pub continuity_residual_rel: Option<f64>,
    pub group_speed: Option<f64>,
    pub localization_widths: BTreeMap<DensityKind, LocalizationWidth>,
    pub lightcone_leak: Option<f64>,
}

fn require_normalized(s: &PhotonSpectrum) -> Result<()> {
    let n = s.norm();
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// Box-periodic centroid: per axis, the argument of `Σ w e^{2πi (x - x_c)/L}`
/// about the box centre `x_c`, mapped back to a position. Singleton axes
/// report their only coordinate.
pub fn circular_centroid(grid: &SpatialGrid, weights: &[f64]) -> Vec3 {
    let n = grid.n_per_axis();
    let l = grid.box_lengths();
    let origin = grid.origin();
    let centre = [0, 1, 2].map(|a| origin[a] + 0.5 * l[a]);
    let mut acc = [ComplexNeumaier::default(); 3];
    for (j, w) in weights.iter().enumerate() {
        let x = grid.point(j);
        for a in 0..3 {
            if n[a] > 1 {
                acc[a].add(*w * C64::from_polar(1.0, 2.0 * PI * (x[a] - centre[a]) / l[a]));
            }
        }
    }
    [0, 1, 2].map(|a| {
        if n[a] == 1 {
            return origin[a];
        }
        centre[a] + acc[a].value().arg() / (2.0 * PI) * l[a]
    })
}

/// Number, energy, momentum and helicity integrals plus the `ρ_p`-weighted
/// mean position at time `t`.
pub fn expectations(s: &PhotonSpectrum, t: f64) -> Result<ObservableReport> {
    require_normalized(s)?;
    let f = densities::snapshot(s, t)?;
    let rho = densities::number_density(&f);
    let number = rho.integral()[0];
    let energy = densities::energy_density(&f).integral()[0];
    let momentum = densities::momentum_density(&f).integral3();
    let helicity = densities::helicity_density(&f).integral()[0];
    let mean_position = circular_centroid(&rho.grid, rho.scalar().expect("scalar density"));
    Ok(ObservableReport {
        number,
        energy,
        momentum,
        helicity,
        mean_position,
        continuity_residual_rel: None,
        group_speed: None,
        localization_widths: BTreeMap::new(),
        lightcone_leak: None,
    })
}

fn l2(v: impl Iterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::new();
    v.for_each(|x| acc.add(x * x));
    acc.value().sqrt()
}

/// `‖∂_tρ_p + ∇·J_p‖₂ / ‖∇·J_p‖₂` with a centred difference over `±dt` and a
/// spectral divergence. Both terms vanishing (a uniform density) reports 0.
pub fn continuity_residual(s: &PhotonSpectrum, t: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let omega_max = s.grid().omega_max();
    if dt * omega_max > 0.01 {
        warn!("dt·ω_max = {:.3e} exceeds 0.01; the centred difference is under-resolved", dt * omega_max);
    }
    let now = densities::snapshot(s, t)?;
    let rho_now = densities::number_density(&now);
    let j = densities::photon_current(&now);
    let before = densities::number_density(&densities::snapshot(s, t - dt)?);
    let after = densities::number_density(&densities::snapshot(s, t + dt)?);
    let transform = SpectralTransform::centered(now.spatial());
    let div = transform.divergence(j.vector().expect("vector density"));
    let (b, a) = (before.scalar().expect("scalar"), after.scalar().expect("scalar"));
    let dt_rho: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) / (2.0 * dt)).collect();

    let div_norm = l2(div.iter().copied());
    let rate_norm = l2(dt_rho.iter().copied());
    let scale = l2(rho_now.scalar().expect("scalar").iter().copied()) * omega_max.max(1.0);
    if div_norm <= 1e-9 * scale && rate_norm <= 1e-9 * scale {
        return Ok(0.0);
    }
    let num = l2(dt_rho.iter().zip(&div).map(|(x, y)| x + y));
    Ok(num / div_norm)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// Continuity residuals for each `dt` and their log-log convergence slope.
pub fn continuity_convergence(s: &PhotonSpectrum, t: f64, dts: &[f64]) -> Result<(Vec<f64>, f64)> {
    let residuals = dts.iter().map(|dt| continuity_residual(s, t, *dt)).collect::<Result<Vec<_>>>()?;
    let slope = log_log_slope(dts, &residuals);
    Ok((residuals, slope))
}

/// Fraction of `∫|w|` lying within the outer guard band of any periodic axis.
fn guard_band_mass(grid: &SpatialGrid, weights: &[f64]) -> f64 {
    let n = grid.n_per_axis();
    let l = grid.box_lengths();
    let origin = grid.origin();
    let mut inside = Neumaier::new();
    let mut total = Neumaier::new();
    for (j, w) in weights.iter().enumerate() {
        let x = grid.point(j);
        total.add(w.abs());
        let edge = (0..3).any(|a| {
            let u = (x[a] - origin[a]) / l[a];
            n[a] > 1 && !(GUARD_FRACTION..1.0 - GUARD_FRACTION).contains(&u)
        });
        if edge {
            inside.add(w.abs());
        }
    }
    inside.value() / total.value()
}

/// Centroid speed `|⟨x⟩(t1) - ⟨x⟩(t0)| / |t1 - t0|` of `ρ_p`.
pub fn transport_speed(s: &PhotonSpectrum, t0: f64, t1: f64) -> Result<f64> {
    if t1 == t0 {
        return Err(Error::ZeroInterval);
    }
    require_normalized(s)?;
    let mut centroids = Vec::with_capacity(2);
    for t in [t0, t1] {
        let rho = densities::number_density(&densities::snapshot(s, t)?);
        let w = rho.scalar().expect("scalar density");
        let guard = guard_band_mass(&rho.grid, w);
        if guard > GUARD_MASS {
            return Err(Error::Wraparound(format!("{:.2e} of the density lies in the guard band at t = {t}", guard)));
        }
        centroids.push(circular_centroid(&rho.grid, w));
    }
    let d = vector::sub(centroids[1], centroids[0]);
    Ok(vector::norm(d) / (t1 - t0).abs())
}

/// 99% mass radius of one scalar density about its periodic centroid, using
/// `|D|` as the mass.
pub fn localization_width(d: &DensityField) -> Result<LocalizationWidth> {
    let w = d.scalar().ok_or_else(|| Error::InvalidArgument(format!("{} is not a scalar density", d.kind.name())))?;
    let total = d.integral()[0];
    let mass: Vec<f64> = w.iter().map(|v| v.abs()).collect();
    let mut abs_total = Neumaier::new();
    mass.iter().for_each(|m| abs_total.add(*m));
    let abs_total = abs_total.value();
    if !(total > 0.0) || !total.is_finite() || !(abs_total > 0.0) {
        return Err(Error::Unnormalizable);
    }
    let grid = &d.grid;
    let centroid = circular_centroid(grid, w);
    let mut by_radius: Vec<(f64, f64)> =
        (0..w.len()).map(|j| (vector::norm(grid.periodic_displacement(grid.point(j), centroid)), mass[j])).collect();
    by_radius.sort_by(|a, b| a.0.total_cmp(&b.0));
    let target = WIDTH_MASS * abs_total;
    let mut acc = Neumaier::new();
    let mut radius = by_radius.last().map(|p| p.0).unwrap_or(0.0);
    for (r, m) in &by_radius {
        acc.add(*m);
        if acc.value() >= target {
            radius = *r;
            break;
        }
    }
    let n = grid.n_per_axis();
    let l = grid.box_lengths();
    let smallest = (0..3).filter(|a| n[*a] > 1).map(|a| l[a]).fold(f64::INFINITY, f64::min);
    Ok(LocalizationWidth { radius, centroid, box_limited: radius >= 0.45 * smallest })
}

/// Widths of each density, keyed by kind. The ordering of the widths is logged.
pub fn localization_widths(fields: &[DensityField]) -> Result<BTreeMap<DensityKind, LocalizationWidth>> {
    let mut out = BTreeMap::new();
    for d in fields {
        let w = localization_width(d)?;
        if w.box_limited {
            info!("{} width {:.4} is box-limited", d.kind.name(), w.radius);
        }
        out.insert(d.kind, w);
    }
    let mut order: Vec<_> = out.iter().map(|(k, w)| (w.radius, k.name())).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let text: Vec<String> = order.iter().map(|(r, k)| format!("{k}={r:.4}")).collect();
    info!("localization widths (ascending): {}", text.join(" < "));
    Ok(out)
}

/// `∫_{|x - x₀| > R + ct} |ρ_p(x, t)| dx` with `x₀` the centroid of `ρ_p` at
/// `t = 0`. Requires 99.9% of the initial mass inside `R`.
pub fn lightcone_leak(s: &PhotonSpectrum, r: f64, t: f64) -> Result<f64> {
    require_normalized(s)?;
    let rho0 = densities::number_density(&densities::snapshot(s, 0.0)?);
    let grid = rho0.grid.clone();
    let w0 = rho0.scalar().expect("scalar density");
    let x0 = circular_centroid(&grid, w0);
    let dv = grid.cell_volume();
    let distances: Vec<f64> = (0..grid.len()).map(|j| vector::norm(grid.periodic_displacement(grid.point(j), x0))).collect();
    let mut inside = Neumaier::new();
    let mut total = Neumaier::new();
    for (d, w) in distances.iter().zip(w0) {
        total.add(w.abs());
        if *d <= r {
            inside.add(w.abs());
        }
    }
    let fraction = inside.value() / total.value();
    if fraction < 0.999 {
        return Err(Error::Precondition(format!("only {:.5} of the initial density lies within R = {r}", fraction)));
    }
    let horizon = r + t.abs();
    let rho = if t == 0.0 { rho0 } else { densities::number_density(&densities::snapshot(s, t)?) };
    let mut leak = Neumaier::new();
    for (d, w) in distances.iter().zip(rho.scalar().expect("scalar density")) {
        if *d > horizon {
            leak.add(w.abs());
        }
    }
    Ok(leak.value() * dv)
}
