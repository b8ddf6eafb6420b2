//! Lorenz-gauge retarded potentials of a prescribed four-current.
//!
//! ```text
//! (φ/c, A)(x, t) = 1/(4π) ∫ dx' (cρ, J)(x', t - |x - x'|/c) / |x - x'|      (ε₀ = c = 1)
//! ```
//!
//! evaluated by the midpoint rule over source cells with linear interpolation
//! between source time slices.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::Neumaier;
use crate::synthesis::SpatialGrid;
use crate::vector::{self, Vec3};

/// `[cρ, J_x, J_y, J_z]` at one cell and time.
pub type FourVector = [f64; 4];

/// Four-current sampled on a source grid over the uniform time window
/// `t0 + i·dt`, `i < n_t`. Only cells that are nonzero at some time are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceCurrent {
    grid: SpatialGrid,
    t0: f64,
    dt: f64,
    n_t: usize,
    cells: Vec<usize>,
    /// `samples[slice * cells.len() + c]`.
    samples: Vec<FourVector>,
}

impl SourceCurrent {
    /// `slices[i][j]` is the four-current at time `t0 + i·dt` and grid point `j`.
    pub fn from_dense(grid: SpatialGrid, t0: f64, dt: f64, slices: Vec<Vec<FourVector>>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::InvalidArgument("a source needs at least one time slice".into()));
        }
        if slices.len() > 1 && !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("source time step must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidArgument("source start time must be finite".into()));
        }
        if let Some(bad) = slices.iter().find(|s| s.len() != grid.len()) {
            return Err(Error::InvalidArgument(format!("slice has {} samples, grid has {}", bad.len(), grid.len())));
        }
        if slices.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("source samples must be finite".into()));
        }
        let cells: Vec<usize> = (0..grid.len()).filter(|j| slices.iter().any(|s| s[*j].iter().any(|v| *v != 0.0))).collect();
        let mut samples = Vec::with_capacity(cells.len() * slices.len());
        for s in &slices {
            samples.extend(cells.iter().map(|j| s[*j]));
        }
        Ok(Self { grid, t0, dt, n_t: slices.len(), cells, samples })
    }

    /// Samples `f(x, t)` at every grid point and time slice.
    pub fn from_fn(grid: SpatialGrid, t0: f64, dt: f64, n_t: usize, f: impl Fn(Vec3, f64) -> FourVector) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::InvalidArgument("a source needs at least one time slice".into()));
        }
        if n_t > 1 && !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("source time step must be positive, got {dt}")));
        }
        let mut cells = Vec::new();
        let mut series = Vec::new();
        for j in 0..grid.len() {
            let x = grid.point(j);
            let s: Vec<FourVector> = (0..n_t).map(|i| f(x, t0 + i as f64 * dt)).collect();
            if s.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("source samples must be finite".into()));
            }
            if s.iter().flatten().any(|v| *v != 0.0) {
                cells.push(j);
                series.push(s);
            }
        }
        let mut samples = Vec::with_capacity(cells.len() * n_t);
        for i in 0..n_t {
            samples.extend(series.iter().map(|s| s[i]));
        }
        Ok(Self { grid, t0, dt, n_t, cells, samples })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn time_step(&self) -> f64 {
        self.dt
    }

    pub fn slice_count(&self) -> usize {
        self.n_t
    }

    pub fn slice_time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t0, self.slice_time(self.n_t - 1))
    }

    /// Grid indices of the stored (nonzero somewhere) cells.
    pub fn active_cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn to_dense(&self) -> Vec<Vec<FourVector>> {
        (0..self.n_t)
            .map(|i| {
                let mut s = vec![[0.0; 4]; self.grid.len()];
                for (c, j) in self.cells.iter().enumerate() {
                    s[*j] = self.samples[i * self.cells.len() + c];
                }
                s
            })
            .collect()
    }

    /// Rewrites every sample with `f(x, t, value)`. Cells outside the active
    /// set stay zero.
    pub fn map_samples(&self, f: impl Fn(Vec3, f64, FourVector) -> FourVector) -> Result<Self> {
        let mut dense = self.to_dense();
        for (i, slice) in dense.iter_mut().enumerate() {
            let t = self.slice_time(i);
            for j in &self.cells {
                slice[*j] = f(self.grid.point(*j), t, slice[*j]);
            }
        }
        Self::from_dense(self.grid.clone(), self.t0, self.dt, dense)
    }

    /// `α·self + β·other` on the same grid and window.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.grid != other.grid || self.t0 != other.t0 || self.dt != other.dt || self.n_t != other.n_t {
            return Err(Error::GridMismatch);
        }
        let mut dense = self.to_dense();
        for (slice, o) in dense.iter_mut().zip(other.to_dense()) {
            for (v, w) in slice.iter_mut().zip(o) {
                for m in 0..4 {
                    v[m] = alpha * v[m] + beta * w[m];
                }
            }
        }
        Self::from_dense(self.grid.clone(), self.t0, self.dt, dense)
    }

    /// Linear interpolation of stored cell `c` at time `t`.
    fn interpolate(&self, c: usize, t: f64) -> Result<FourVector> {
        let (start, end) = self.window();
        let slack = 1e-12 * self.dt.max(1.0);
        if t < start - slack || t > end + slack {
            return Err(Error::RetardedTimeOutsideWindow { t_ret: t, start, end });
        }
        let nc = self.cells.len();
        if self.n_t == 1 {
            return Ok(self.samples[c]);
        }
        let u = ((t - self.t0) / self.dt).clamp(0.0, (self.n_t - 1) as f64);
        let i = (u.floor() as usize).min(self.n_t - 2);
        let f = u - i as f64;
        let a = self.samples[i * nc + c];
        let b = self.samples[(i + 1) * nc + c];
        Ok([0, 1, 2, 3].map(|m| a[m] + f * (b[m] - a[m])))
    }

    /// Discrete charge-conservation residual
    /// `‖∂_tρ + ∇·J‖₂ / max(‖∇·J‖₂, ε)` with fourth-order central differences
    /// (second order on axes with fewer than five samples) over interior samples.
    pub fn conservation_residual(&self) -> Result<f64> {
        let mut slot = vec![usize::MAX; self.grid.len()];
        for (c, j) in self.cells.iter().enumerate() {
            slot[*j] = c;
        }
        let nc = self.cells.len();
        let at = |i: usize, j: usize, m: usize| -> f64 {
            match slot[j] {
                usize::MAX => 0.0,
                c => self.samples[i * nc + c][m],
            }
        };
        let n = self.grid.n_per_axis();
        let h = self.grid.delta_x();
        let time = Stencil::for_len(self.n_t);
        let space = n.map(Stencil::for_len);
        let mut num = Neumaier::new();
        let mut den = Neumaier::new();
        for i in time.interior(self.n_t) {
            for j in 0..self.grid.len() {
                let c = self.grid.coords(j);
                if (0..3).any(|a| !space[a].interior(n[a]).contains(&c[a])) {
                    continue;
                }
                let rate = time.apply(|o| at(offset(i, o), j, 0), self.dt);
                let mut div = 0.0;
                for a in 0..3 {
                    if n[a] == 1 {
                        continue;
                    }
                    div += space[a].apply(
                        |o| {
                            let mut cc = c;
                            cc[a] = offset(c[a], o);
                            at(i, self.grid.index(cc), a + 1)
                        },
                        h[a],
                    );
                }
                num.add((rate + div) * (rate + div));
                den.add(div * div);
            }
        }
        Ok(num.value().sqrt() / den.value().sqrt().max(f64::MIN_POSITIVE))
    }
}

fn offset(i: usize, o: isize) -> usize {
    (i as isize + o) as usize
}

/// Central-difference first derivative.
#[derive(Clone, Copy, Debug)]
enum Stencil {
    None,
    Forward,
    Second,
    Fourth,
}

impl Stencil {
    fn for_len(m: usize) -> Self {
        match m {
            0 | 1 => Stencil::None,
            2 => Stencil::Forward,
            3 | 4 => Stencil::Second,
            _ => Stencil::Fourth,
        }
    }

    fn interior(self, m: usize) -> std::ops::Range<usize> {
        match self {
            Stencil::None => 0..m,
            Stencil::Forward => 0..1,
            Stencil::Second => 1..m - 1,
            Stencil::Fourth => 2..m - 2,
        }
    }

    fn apply(self, f: impl Fn(isize) -> f64, h: f64) -> f64 {
        match self {
            Stencil::None => 0.0,
            Stencil::Forward => (f(1) - f(0)) / h,
            Stencil::Second => (f(1) - f(-1)) / (2.0 * h),
            Stencil::Fourth => (8.0 * (f(1) - f(-1)) - (f(2) - f(-2))) / (12.0 * h),
        }
    }
}

/// Treatment of evaluation points that fall inside the source box.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Regularization {
    /// Points inside a source cell are rejected.
    Off,
    /// Distances are floored at half the smallest source cell size.
    #[default]
    HalfCell,
    Radius(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RetardedOptions {
    pub regularization: Regularization,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
}

/// Where a potential is sampled.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalPoints {
    /// Structured lattice, required for derivatives.
    Lattice(SpatialGrid),
    Scattered(Vec<Vec3>),
}

impl EvalPoints {
    pub fn len(&self) -> usize {
        match self {
            EvalPoints::Lattice(g) => g.len(),
            EvalPoints::Scattered(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, j: usize) -> Vec3 {
        match self {
            EvalPoints::Lattice(g) => g.point(j),
            EvalPoints::Scattered(p) => p[j],
        }
    }
}

/// `(φ/c, A)` on evaluation points × times.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    pub points: EvalPoints,
    pub times: Vec<f64>,
    /// `values[it * points.len() + j]`.
    values: Vec<FourVector>,
}

impl PotentialField {
    /// Samples an analytic potential.
    pub fn from_fn(points: EvalPoints, times: Vec<f64>, f: impl Fn(Vec3, f64) -> FourVector) -> Self {
        let mut values = Vec::with_capacity(points.len() * times.len());
        for t in &times {
            values.extend((0..points.len()).map(|j| f(points.point(j), *t)));
        }
        Self { points, times, values }
    }

    pub fn value(&self, it: usize, j: usize) -> FourVector {
        self.values[it * self.points.len() + j]
    }

    pub fn phi_over_c(&self, it: usize, j: usize) -> f64 {
        self.value(it, j)[0]
    }

    pub fn vector_potential(&self, it: usize, j: usize) -> Vec3 {
        let v = self.value(it, j);
        [v[1], v[2], v[3]]
    }

    pub fn values(&self) -> &[FourVector] {
        &self.values
    }
}

fn regularization_radius(src: &SpatialGrid, r: Regularization) -> Option<f64> {
    match r {
        Regularization::Off => None,
        Regularization::HalfCell => {
            let h = src.delta_x();
            Some(0.5 * h[0].min(h[1]).min(h[2]))
        }
        Regularization::Radius(r) => Some(r),
    }
}

fn inside_source_box(src: &SpatialGrid, x: Vec3) -> bool {
    let n = src.n_per_axis();
    let h = src.delta_x();
    let o = src.origin();
    (0..3).all(|a| x[a] >= o[a] - 0.5 * h[a] && x[a] <= o[a] + (n[a] as f64 - 0.5) * h[a])
}

fn thread_count(requested: usize, work: usize) -> usize {
    let auto = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let n = if requested == 0 { auto } else { requested };
    n.clamp(1, work.max(1))
}

/// Retarded `(φ/c, A)` at every evaluation point and time.
pub fn retarded_potential(
    src: &SourceCurrent,
    points: EvalPoints,
    times: &[f64],
    opts: &RetardedOptions,
) -> Result<PotentialField> {
    let reg = regularization_radius(&src.grid, opts.regularization);
    if reg.is_none() {
        if let Some(j) = (0..points.len()).find(|j| inside_source_box(&src.grid, points.point(*j))) {
            return Err(Error::Coincident(points.point(j)));
        }
    }
    let positions: Vec<Vec3> = src.cells.iter().map(|j| src.grid.point(*j)).collect();
    let weight = src.grid.cell_volume() / (4.0 * PI);
    let np = points.len();
    let jobs: Vec<(usize, usize)> = (0..times.len()).flat_map(|it| (0..np).map(move |j| (it, j))).collect();
    let eval = |&(it, j): &(usize, usize)| -> Result<FourVector> {
        let x = points.point(j);
        let t = times[it];
        let mut acc = [Neumaier::new(); 4];
        for (c, xs) in positions.iter().enumerate() {
            let mut r = vector::norm(vector::sub(x, *xs));
            if let Some(floor) = reg {
                r = r.max(floor);
            }
            let v = src.interpolate(c, t - r)?;
            for m in 0..4 {
                acc[m].add(v[m] / r);
            }
        }
        Ok(acc.map(|a| a.value() * weight))
    };

    let threads = thread_count(opts.threads, jobs.len());
    let values = if threads == 1 {
        jobs.iter().map(eval).collect::<Result<Vec<_>>>()?
    } else {
        let chunk = jobs.len().div_ceil(threads);
        let parts: Vec<Result<Vec<FourVector>>> = std::thread::scope(|scope| {
            let handles: Vec<_> =
                jobs.chunks(chunk).map(|part| scope.spawn(|| part.iter().map(eval).collect::<Result<Vec<_>>>())).collect();
            handles.into_iter().map(|h| h.join().expect("evaluation thread panicked")).collect()
        });
        let mut out = Vec::with_capacity(jobs.len());
        for p in parts {
            out.extend(p?);
        }
        out
    };
    Ok(PotentialField { points, times: times.to_vec(), values })
}

/// Lattice and uniform time step required by the differential operators.
struct Layout<'a> {
    grid: &'a SpatialGrid,
    dt: f64,
}

fn layout(pf: &PotentialField) -> Result<Layout<'_>> {
    let EvalPoints::Lattice(grid) = &pf.points else {
        return Err(Error::InsufficientStencil("derivatives need lattice evaluation points".into()));
    };
    if pf.times.len() < 4 {
        return Err(Error::InsufficientStencil(format!("need at least 4 time slices, got {}", pf.times.len())));
    }
    let dt = pf.times[1] - pf.times[0];
    let uniform = pf.times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs());
    if !(dt > 0.0) || !uniform {
        return Err(Error::InsufficientStencil("time slices must be increasing and uniform".into()));
    }
    let n = grid.n_per_axis();
    if n.iter().all(|m| *m == 1) || n.contains(&2) {
        return Err(Error::InsufficientStencil(format!("lattice {n:?} has no interior points")));
    }
    Ok(Layout { grid, dt })
}

/// `∂^μ A^ν` (with `∂^0 = ∂_t`, `∂^i = -∂_i`) at an interior sample.
fn gradient(pf: &PotentialField, l: &Layout, it: usize, j: usize) -> [[f64; 4]; 4] {
    let n = l.grid.n_per_axis();
    let h = l.grid.delta_x();
    let c = l.grid.coords(j);
    let mut d = [[0.0; 4]; 4];
    let (prev, next) = (pf.value(it - 1, j), pf.value(it + 1, j));
    for nu in 0..4 {
        d[0][nu] = (next[nu] - prev[nu]) / (2.0 * l.dt);
    }
    for a in 0..3 {
        if n[a] == 1 {
            continue;
        }
        let (mut lo, mut hi) = (c, c);
        lo[a] -= 1;
        hi[a] += 1;
        let (vl, vh) = (pf.value(it, l.grid.index(lo)), pf.value(it, l.grid.index(hi)));
        for nu in 0..4 {
            d[a + 1][nu] = -(vh[nu] - vl[nu]) / (2.0 * h[a]);
        }
    }
    d
}

fn interior(l: &Layout, nt: usize) -> Vec<(usize, usize)> {
    let n = l.grid.n_per_axis();
    let mut out = Vec::new();
    for it in 1..nt - 1 {
        for j in 0..l.grid.len() {
            let c = l.grid.coords(j);
            if (0..3).all(|a| n[a] == 1 || (c[a] >= 1 && c[a] + 1 < n[a])) {
                out.push((it, j));
            }
        }
    }
    out
}

/// `‖(1/c²)∂_tφ + ∇·A‖₂ / ‖∇·A‖₂` over interior stencil samples. When `∇·A`
/// vanishes identically the absolute norm is returned.
pub fn gauge_residual(pf: &PotentialField) -> Result<f64> {
    let l = layout(pf)?;
    let mut num = Neumaier::new();
    let mut den = Neumaier::new();
    for (it, j) in interior(&l, pf.times.len()) {
        let d = gradient(pf, &l, it, j);
        // ∂^i = -∂_i, so ∇·A = -Σ_i ∂^i A^i.
        let div = -(d[1][1] + d[2][2] + d[3][3]);
        let lorenz = d[0][0] + div;
        num.add(lorenz * lorenz);
        den.add(div * div);
    }
    let den = den.value().sqrt();
    let num = num.value().sqrt();
    Ok(if den > 0.0 { num / den } else { num })
}

/// Fields and Faraday tensor at interior stencil samples.
#[derive(Clone, Debug, PartialEq)]
pub struct EmFields {
    pub points: Vec<Vec3>,
    pub times: Vec<f64>,
    pub e: Vec<Vec3>,
    pub b: Vec<Vec3>,
    /// `F^{μν} = ∂^μ A^ν - ∂^ν A^μ`.
    pub faraday: Vec<[[f64; 4]; 4]>,
}

impl EmFields {
    /// `max |F^{μν} + F^{νμ}|`; zero by construction.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for f in &self.faraday {
            for mu in 0..4 {
                for nu in 0..4 {
                    worst = worst.max((f[mu][nu] + f[nu][mu]).abs());
                }
            }
        }
        worst
    }
}

/// `E = -∂_tA - ∇φ`, `B = ∇×A` read off an antisymmetrized Faraday tensor.
pub fn fields_from_potential(pf: &PotentialField) -> Result<EmFields> {
    let l = layout(pf)?;
    let samples = interior(&l, pf.times.len());
    let mut out = EmFields {
        points: Vec::with_capacity(samples.len()),
        times: Vec::with_capacity(samples.len()),
        e: Vec::with_capacity(samples.len()),
        b: Vec::with_capacity(samples.len()),
        faraday: Vec::with_capacity(samples.len()),
    };
    for (it, j) in samples {
        let d = gradient(pf, &l, it, j);
        let mut f = [[0.0; 4]; 4];
        for mu in 0..4 {
            for nu in (mu + 1)..4 {
                f[mu][nu] = d[mu][nu] - d[nu][mu];
                f[nu][mu] = -f[mu][nu];
            }
        }
        out.points.push(l.grid.point(j));
        out.times.push(pf.times[it]);
        out.e.push([-f[0][1], -f[0][2], -f[0][3]]);
        out.b.push([-f[2][3], -f[3][1], -f[1][2]]);
        out.faraday.push(f);
    }
    Ok(out)
}

/// Smooth compact bump `(1 - r²/a²)^p` for `r < a`.
pub fn bump(r: f64, a: f64, power: i32) -> f64 {
    if r >= a {
        0.0
    } else {
        (1.0 - (r / a).powi(2)).powi(power)
    }
}

/// Oscillating point-like dipole `p(t) = p₀ ẑ cos(ωt)` smeared over a bump `g`
/// of radius `a` centred on the origin: `J = ṗ g` and `ρ = -p D_z g`, where
/// `D_z` is the fourth-order difference used by
/// [`SourceCurrent::conservation_residual`], so the sampled source obeys the
/// discrete continuity equation. `g` is normalized on `grid` so the discrete
/// dipole moment is `p₀`.
pub fn dipole_source(grid: SpatialGrid, a: f64, p0: f64, omega: f64, t0: f64, dt: f64, n_t: usize) -> Result<SourceCurrent> {
    const POWER: i32 = 6;
    let mut norm = Neumaier::new();
    let g: Vec<f64> = (0..grid.len()).map(|j| bump(vector::norm(grid.point(j)), a, POWER)).collect();
    g.iter().for_each(|v| norm.add(*v));
    let scale = 1.0 / (norm.value() * grid.cell_volume());
    let n = grid.n_per_axis();
    let h = grid.delta_x()[2];
    let dz: Vec<f64> = (0..grid.len())
        .map(|j| {
            let c = grid.coords(j);
            let at = |o: isize| {
                let z = c[2] as isize + o;
                if z < 0 || z >= n[2] as isize {
                    0.0
                } else {
                    g[grid.index([c[0], c[1], z as usize])]
                }
            };
            scale * Stencil::Fourth.apply(at, h)
        })
        .collect();
    let index_of = |x: Vec3| {
        let o = grid.origin();
        let d = grid.delta_x();
        grid.index([0, 1, 2].map(|k| ((x[k] - o[k]) / d[k]).round() as usize))
    };
    SourceCurrent::from_fn(grid.clone(), t0, dt, n_t, |x, t| {
        let j = index_of(x);
        let p = p0 * (omega * t).cos();
        let pdot = -p0 * omega * (omega * t).sin();
        [-p * dz[j], 0.0, 0.0, pdot * scale * g[j]]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(n: usize, h: f64) -> SpatialGrid {
        let o = -0.5 * (n as f64 - 1.0) * h;
        SpatialGrid::new([n; 3], [h; 3], [o; 3]).unwrap()
    }

    /// Charge `q` spread as `(1 - r²/a²)²`; returns the source and its exact `q`.
    fn static_charge(a: f64, cells_per_radius: usize) -> (SourceCurrent, f64) {
        let h = a / cells_per_radius as f64;
        let n = 2 * cells_per_radius + 2;
        let q = 1.0;
        let rho0 = 105.0 * q / (32.0 * PI * a.powi(3));
        let src = SourceCurrent::from_fn(cube(n, h), -40.0, 41.0, 2, |x, _| [rho0 * bump(vector::norm(x), a, 2), 0.0, 0.0, 0.0])
            .unwrap();
        (src, q)
    }

    fn coulomb_error(cells_per_radius: usize) -> f64 {
        let a = 1.0;
        let (src, q) = static_charge(a, cells_per_radius);
        let pts: Vec<Vec3> = [3.0, 4.5, 7.0, 10.0].iter().flat_map(|r| [[*r, 0.0, 0.0], [0.0, r * 0.6, r * 0.8]]).collect();
        let pf = retarded_potential(&src, EvalPoints::Scattered(pts.clone()), &[0.0], &RetardedOptions::default()).unwrap();
        pts.iter()
            .enumerate()
            .map(|(j, x)| {
                let exact = q / (4.0 * PI * vector::norm(*x));
                (pf.phi_over_c(0, j) - exact).abs() / exact
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn coulomb_limit_and_convergence() {
        let coarse = coulomb_error(6);
        let fine = coulomb_error(12);
        assert!(fine <= 1e-3, "{fine}");
        assert!(coarse >= 2.0 * fine, "{coarse} {fine}");
    }

    #[test]
    fn static_charge_gauge_and_fields() {
        let (src, q) = static_charge(1.0, 6);
        assert_eq!(src.conservation_residual().unwrap(), 0.0);
        let lattice = SpatialGrid::new([5, 5, 5], [0.02; 3], [3.96, -0.04, -0.04]).unwrap();
        let times = vec![0.0, 0.05, 0.1, 0.15];
        let pf = retarded_potential(&src, EvalPoints::Lattice(lattice), &times, &RetardedOptions::default()).unwrap();
        assert!(gauge_residual(&pf).unwrap() <= 1e-10);
        let em = fields_from_potential(&pf).unwrap();
        assert_eq!(em.antisymmetry_defect(), 0.0);
        for (x, (e, b)) in em.points.iter().zip(em.e.iter().zip(&em.b)) {
            assert!(vector::norm(*b) <= 1e-10);
            let r = vector::norm(*x);
            let exact = vector::scale(q / (4.0 * PI * r.powi(3)), *x);
            assert!(vector::norm(vector::sub(*e, exact)) / vector::norm(exact) <= 2e-3);
        }
    }

    #[test]
    fn zero_source_gives_zero_potential() {
        let src = SourceCurrent::from_fn(cube(4, 0.1), 0.0, 0.1, 3, |_, _| [0.0; 4]).unwrap();
        assert!(src.active_cells().is_empty());
        let pf =
            retarded_potential(&src, EvalPoints::Scattered(vec![[1.0, 2.0, 3.0]]), &[50.0], &RetardedOptions::default()).unwrap();
        assert_eq!(pf.value(0, 0), [0.0; 4]);
    }

    fn dipole(h: f64, dt: f64, window: (f64, f64)) -> SourceCurrent {
        let a = 0.2;
        let n = (2.0 * a / h).ceil() as usize + 6;
        let n_t = ((window.1 - window.0) / dt).ceil() as usize + 1;
        dipole_source(cube(n, h), a, 1.0, 2.0, window.0, dt, n_t).unwrap()
    }

    #[test]
    fn dipole_source_is_conserved() {
        let src = dipole(0.04, 0.01, (0.0, 0.5));
        let r = src.conservation_residual().unwrap();
        assert!(r <= 1e-3, "{r}");
    }

    #[test]
    fn radiation_zone_falls_off_as_one_over_r() {
        let omega = 2.0;
        let quarter = PI / (2.0 * omega);
        let src = dipole(0.05, 0.02, (-21.5, 0.0));
        let radii = [5.0, 7.5, 10.0, 15.0, 20.0];
        let pts: Vec<Vec3> = radii.iter().map(|r| [*r, 0.0, 0.0]).collect();
        let pf = retarded_potential(&src, EvalPoints::Scattered(pts), &[-quarter, 0.0], &RetardedOptions::default()).unwrap();
        let amp: Vec<f64> = (0..radii.len())
            .map(|j| (vector::norm(pf.vector_potential(0, j)).powi(2) + vector::norm(pf.vector_potential(1, j)).powi(2)).sqrt())
            .collect();
        let slope = crate::observables::log_log_slope(&radii, &amp);
        assert!((slope + 1.0).abs() <= 0.05, "{slope} {amp:?}");
    }

    fn dipole_gauge(h_eval: f64, h_src: f64, dt_src: f64) -> f64 {
        let src = dipole(h_src, dt_src, (-8.0, 0.5));
        let centre = [3.0, 0.0, 3.0];
        let lattice = SpatialGrid::new([3; 3], [h_eval; 3], centre.map(|c| c - h_eval)).unwrap();
        let times: Vec<f64> = (0..4).map(|i| i as f64 * h_eval).collect();
        let pf = retarded_potential(&src, EvalPoints::Lattice(lattice), &times, &RetardedOptions::default()).unwrap();
        gauge_residual(&pf).unwrap()
    }

    #[test]
    fn dipole_satisfies_lorenz_gauge_with_refinement() {
        let coarse = dipole_gauge(0.1, 0.05, 0.02);
        let fine = dipole_gauge(0.05, 0.025, 0.01);
        assert!(coarse <= 1e-2, "{coarse}");
        assert!(coarse >= 2.0 * fine, "{coarse} {fine}");
    }

    #[test]
    fn non_conserved_source_violates_gauge() {
        let src = dipole(0.05, 0.02, (-8.0, 0.5)).map_samples(|_, _, v| [0.0, v[1], v[2], v[3]]).unwrap();
        assert!(src.conservation_residual().unwrap() > 0.1);
        let lattice = SpatialGrid::new([3; 3], [0.1; 3], [2.9, -0.1, 2.9]).unwrap();
        let times: Vec<f64> = (0..4).map(|i| i as f64 * 0.1).collect();
        let pf = retarded_potential(&src, EvalPoints::Lattice(lattice), &times, &RetardedOptions::default()).unwrap();
        assert!(gauge_residual(&pf).unwrap() > 0.1);
    }

    #[test]
    fn causality_is_exact() {
        let src = dipole(0.05, 0.02, (-8.0, 0.5));
        let x = [4.0, 1.0, -2.0];
        let t = 0.0;
        let dt = src.time_step();
        // Perturb every sample later than one slice past its own retarded time.
        let edited = src
            .map_samples(|xs, ts, v| {
                let t_ret = t - vector::norm(vector::sub(x, xs));
                if ts > t_ret + dt * 1.000001 {
                    [v[0] + 3.0, v[1] - 1.0, v[2] + 7.0, v[3] * 5.0 + 1.0]
                } else {
                    v
                }
            })
            .unwrap();
        assert_ne!(edited, src);
        let opts = RetardedOptions::default();
        let a = retarded_potential(&src, EvalPoints::Scattered(vec![x]), &[t], &opts).unwrap();
        let b = retarded_potential(&edited, EvalPoints::Scattered(vec![x]), &[t], &opts).unwrap();
        assert_eq!(a.value(0, 0), b.value(0, 0));
    }

    #[test]
    fn potential_is_linear_in_the_source() {
        let s1 = dipole(0.05, 0.02, (-8.0, 0.5));
        let s2 = s1.map_samples(|x, t, v| [v[0] * (1.0 + x[0]), v[1] + x[1] * t, v[2], v[3] * 0.5]).unwrap();
        let mix = s1.combine(2.0, &s2, -0.7).unwrap();
        let pts = EvalPoints::Scattered(vec![[3.0, 0.5, 1.0], [0.0, 5.0, -2.0]]);
        let opts = RetardedOptions { threads: 2, ..Default::default() };
        let p1 = retarded_potential(&s1, pts.clone(), &[0.0, 0.3], &opts).unwrap();
        let p2 = retarded_potential(&s2, pts.clone(), &[0.0, 0.3], &opts).unwrap();
        let pm = retarded_potential(&mix, pts, &[0.0, 0.3], &opts).unwrap();
        for ((a, b), m) in p1.values().iter().zip(p2.values()).zip(pm.values()) {
            for c in 0..4 {
                let expect = 2.0 * a[c] - 0.7 * b[c];
                assert!((m[c] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn window_and_coincidence_errors() {
        let src = dipole(0.05, 0.02, (-1.0, 0.5));
        let far = EvalPoints::Scattered(vec![[10.0, 0.0, 0.0]]);
        assert!(matches!(
            retarded_potential(&src, far, &[0.0], &RetardedOptions::default()),
            Err(Error::RetardedTimeOutsideWindow { .. })
        ));
        let inside = EvalPoints::Scattered(vec![[0.0, 0.0, 0.0]]);
        let off = RetardedOptions { regularization: Regularization::Off, threads: 1 };
        assert!(matches!(retarded_potential(&src, inside.clone(), &[0.0], &off), Err(Error::Coincident(_))));
        let pf = retarded_potential(&src, inside, &[0.0], &RetardedOptions::default()).unwrap();
        assert!(pf.values().iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn plane_wave_potential_has_equal_e_and_b() {
        let k = 1.3;
        let lattice = SpatialGrid::new([3, 3, 5], [0.01; 3], [0.2, -0.3, 0.4]).unwrap();
        let times: Vec<f64> = (0..5).map(|i| 0.7 + i as f64 * 0.01).collect();
        let pf =
            PotentialField::from_fn(EvalPoints::Lattice(lattice), times, |x, t| [0.0, 0.8 * (k * (x[2] - t)).cos(), 0.0, 0.0]);
        assert!(gauge_residual(&pf).unwrap() <= 1e-12);
        let em = fields_from_potential(&pf).unwrap();
        assert_eq!(em.antisymmetry_defect(), 0.0);
        for (e, b) in em.e.iter().zip(&em.b) {
            let (ne, nb) = (vector::norm(*e), vector::norm(*b));
            assert!((ne - nb).abs() <= 1e-3 * ne.max(nb));
            assert!(vector::dot(*e, *b).abs() <= 1e-12);
        }
    }

    #[test]
    fn derivative_operators_reject_short_stencils() {
        let lattice = SpatialGrid::new([3, 3, 3], [0.1; 3], [0.0; 3]).unwrap();
        let pf = PotentialField::from_fn(EvalPoints::Lattice(lattice.clone()), vec![0.0, 0.1, 0.2], |_, _| [0.0; 4]);
        assert!(matches!(gauge_residual(&pf), Err(Error::InsufficientStencil(_))));
        let scattered = PotentialField::from_fn(EvalPoints::Scattered(vec![[0.0; 3]]), vec![0.0, 0.1, 0.2, 0.3], |_, _| [0.0; 4]);
        assert!(matches!(fields_from_potential(&scattered), Err(Error::InsufficientStencil(_))));
    }
}
