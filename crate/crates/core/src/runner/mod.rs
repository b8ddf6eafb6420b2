//! Scenario orchestration: config in, hashed artifacts and a summary out.
//!
//! The summary (`summary.txt` in the output directory) is a list of
//! `key = value` lines. Checks read `check.<name> = value=<v> tol=<t> pass=<bool>`,
//! artifacts `artifact.<file> = sha256=<hex> bytes=<n>`, and the last line is
//! `status = pass|fail`. Nothing in it depends on the clock or the machine, so
//! equal configs give byte-identical summaries.

pub mod config;
pub mod export;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::densities::{self, DensityField, DensityKind};
use crate::error::{Error, Result};
use crate::mode_space::{self, Helicity, PhotonSpectrum, WaveVectorGrid};
use crate::observables;
use crate::retarded::{self, EvalPoints, RetardedOptions};
use crate::synthesis::{self, SpatialGrid};
use crate::units::{Dimension, UnitSystem};
use crate::vector::{self, C64};

pub use config::ScenarioConfig;
use config::{Diagnostic, GridPlacement, PacketKind, PacketProfile, PacketSpec, Plane, RetardedSpec, SourceSpec};
use export::{fmt_f64, ArrayFile};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SUMMARY_FILE: &str = "summary.txt";
/// Random points compared between the FFT and direct-sum synthesis.
pub const SPOT_CHECK_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for the retarded solver; 0 picks the available parallelism.
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value <= tol }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub metrics: Vec<(String, String)>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    /// Summary text, also written to `dir/summary.txt` when enabled.
    pub summary: String,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// The packet grid described by `cfg`.
pub fn build_grid(cfg: &ScenarioConfig) -> Result<Arc<WaveVectorGrid>> {
    let g = cfg.grid.as_ref().ok_or_else(|| Error::InvalidArgument("scenario has no grid".into()))?;
    let grid = match g.placement {
        GridPlacement::KMin(k) => WaveVectorGrid::new(g.n, g.dk, k)?,
        GridPlacement::Center(c) => WaveVectorGrid::straddled(g.n, g.dk, c)?,
    };
    Ok(Arc::new(grid))
}

fn single_mode(grid: Arc<WaveVectorGrid>, p: &PacketSpec) -> Result<PhotonSpectrum> {
    if !grid.covers(p.k0) {
        return Err(Error::InvalidArgument(format!("k0 = {:?} lies outside the grid", p.k0)));
    }
    let nearest = (0..grid.len())
        .filter(|i| !grid.is_masked(*i))
        .min_by(|a, b| {
            let da = vector::norm(vector::sub(grid.k(*a), p.k0));
            let db = vector::norm(vector::sub(grid.k(*b), p.k0));
            da.total_cmp(&db)
        })
        .ok_or_else(|| Error::InvalidArgument("grid has no unmasked samples".into()))?;
    let mut s = PhotonSpectrum::zeros(grid);
    for h in Helicity::BOTH {
        s.set_amplitude(h, nearest, p.weights[h.index()]);
    }
    mode_space::normalize(&s)
}

/// The packet described by `cfg`, translated to `packet.x0`.
pub fn build_spectrum(cfg: &ScenarioConfig) -> Result<PhotonSpectrum> {
    let p = cfg.packet.as_ref().ok_or_else(|| Error::InvalidArgument("scenario has no packet".into()))?;
    let grid = build_grid(cfg)?;
    let s = match p.kind {
        PacketKind::Localized => return Ok(mode_space::localized_spectrum(grid, p.x0)),
        PacketKind::SingleMode => single_mode(grid, p)?,
        PacketKind::Gaussian | PacketKind::Collinear => {
            if p.kind == PacketKind::Collinear {
                let n = grid.n_per_axis();
                if n[0] != 1 || n[1] != 1 || p.k0[0] != 0.0 || p.k0[1] != 0.0 || grid.k_min()[0] != 0.0 || grid.k_min()[1] != 0.0
                {
                    return Err(Error::NonCollinear);
                }
            }
            match p.profile {
                PacketProfile::Plain => mode_space::gaussian_spectrum(grid, p.k0, p.sigma, p.weights)?,
                PacketProfile::Polarized => mode_space::polarized_gaussian_spectrum(grid, p.k0, p.sigma, p.weights)?,
            }
        }
    };
    Ok(if p.x0 == [0.0; 3] { s } else { mode_space::translate(&s, p.x0) })
}

/// Densities of `kinds` at time `t`.
pub fn density_fields(s: &PhotonSpectrum, t: f64, kinds: &[DensityKind]) -> Result<Vec<DensityField>> {
    let f = densities::snapshot(s, t)?;
    let origin = f.spatial().origin();
    let centre = vector::add(origin, vector::scale(0.5, f.spatial().box_lengths()));
    let mut all = densities::all_densities(&f, s, centre)?;
    kinds
        .iter()
        .map(|k| all.remove(k).ok_or_else(|| Error::MixedHelicity(format!("{} needs a single-helicity packet", k.name()))))
        .collect()
}

struct Recorder {
    dir: PathBuf,
    metrics: Vec<(String, String)>,
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
}

impl Recorder {
    fn metric(&mut self, key: impl Into<String>, value: impl std::fmt::Display) {
        self.metrics.push((key.into(), value.to_string()));
    }

    fn number(&mut self, key: impl Into<String>, value: f64) {
        self.metric(key, fmt_f64(value));
    }

    fn check(&mut self, c: Check) {
        if !c.pass {
            log::warn!("check {} failed: {} > {}", c.name, c.value, c.tol);
        }
        self.checks.push(c);
    }

    fn write(&mut self, file: String, bytes: &[u8]) -> Result<()> {
        export::write_atomic(&self.dir.join(&file), bytes)?;
        self.artifacts.push(Artifact { file, sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }
}

fn relative(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn plane_tag(p: &Plane) -> String {
    format!("{}{}", ["x", "y", "z"][p.axis], fmt_f64(p.value))
}

/// Max over seeded random grid points of `|A⁺_fft - A⁺_direct|`, over `max |A⁺|`.
pub fn synthesis_spot_check(s: &PhotonSpectrum, t: f64, seed: u64) -> Result<f64> {
    let f = densities::snapshot(s, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<usize> = (0..SPOT_CHECK_POINTS).map(|_| rng.gen_range(0..f.len())).collect();
    let points: Vec<_> = picks.iter().map(|j| f.spatial().point(*j)).collect();
    let direct = synthesis::synthesize_direct(s, &points, t);
    let scale = (0..f.len()).map(|j| vector::cnorm_sqr(&f.a_at(j))).fold(0.0, f64::max).sqrt();
    let mut worst = 0.0f64;
    for (j, d) in picks.iter().zip(&direct) {
        let a = f.a_at(*j);
        let diff: [C64; 3] = [0, 1, 2].map(|c| a[c] - d[0][c]);
        worst = worst.max(vector::cnorm_sqr(&diff).sqrt());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

fn run_packet(cfg: &ScenarioConfig, rec: &mut Recorder) -> Result<()> {
    let s = build_spectrum(cfg)?;
    let p = cfg.packet.as_ref().expect("packet present");
    let tol = cfg.tolerances;
    let u = cfg.units;
    let grid = s.grid();
    rec.metric("packet.samples", grid.len());
    rec.number("packet.norm", s.norm());
    let physical = s.is_physical();
    let oracle = mode_space::spectral_summary(&s);

    let t0 = *cfg.times.first().ok_or_else(|| Error::InvalidArgument("no times".into()))?;
    if physical {
        rec.check(Check::at_most("synthesis_spot_check", synthesis_spot_check(&s, t0, cfg.seed)?, tol.synthesis));
    }
    if p.kind == PacketKind::Collinear {
        let tmax = cfg.times.iter().fold(0.0f64, |m, t| m.max(t.abs())).max(1.0);
        rec.check(Check::at_most("translation_1d", synthesis::translation_check_1d(&s, tmax)?, tol.synthesis));
    }

    for (it, &t) in cfg.times.iter().enumerate() {
        let tag = format!("t{it:03}");
        rec.number(format!("{tag}.time"), t * u.scale(Dimension::Time));
        if physical {
            let r = observables::expectations(&s, t)?;
            rec.number(format!("{tag}.number"), r.number);
            rec.number(format!("{tag}.energy"), r.energy * u.scale(Dimension::Energy));
            for (a, name) in ["x", "y", "z"].iter().enumerate() {
                rec.number(format!("{tag}.momentum.{name}"), r.momentum[a] * u.scale(Dimension::Momentum));
            }
            rec.number(format!("{tag}.helicity"), r.helicity * u.scale(Dimension::AngularMomentum));
            for (a, name) in ["x", "y", "z"].iter().enumerate() {
                rec.number(format!("{tag}.mean_position.{name}"), r.mean_position[a] * u.scale(Dimension::Length));
            }
            rec.check(Check::at_most(format!("number.{tag}"), (r.number - 1.0).abs(), tol.number));
            rec.check(Check::at_most(format!("energy.{tag}"), relative(r.energy, oracle.energy), tol.energy));
            let dp = vector::norm(vector::sub(r.momentum, oracle.momentum));
            let pk = vector::norm(oracle.momentum);
            rec.check(Check::at_most(format!("momentum.{tag}"), if pk > 0.0 { dp / pk } else { dp }, tol.momentum));
            rec.check(Check::at_most(format!("helicity.{tag}"), (r.helicity - oracle.helicity).abs(), tol.helicity));
        } else {
            let rho = densities::number_density(&densities::snapshot(&s, t)?);
            rec.number(format!("{tag}.number_integral"), rho.integral()[0]);
        }
        if !cfg.outputs.densities.is_empty() {
            for d in density_fields(&s, t, &cfg.outputs.densities)? {
                let name = d.kind.name();
                rec.write(format!("{name}_{tag}.bin"), &ArrayFile::from_density(&d, u).to_bytes())?;
                for plane in &cfg.outputs.slice_planes {
                    let csv = export::slice_csv(&d, plane.axis, plane.value, u);
                    rec.write(format!("{name}_{tag}_{}.csv", plane_tag(plane)), csv.as_bytes())?;
                }
            }
        }
    }

    for diag in &cfg.outputs.diagnostics {
        match diag {
            Diagnostic::Continuity => {
                let omega0 = oracle.energy.max(f64::MIN_POSITIVE);
                let dt = cfg.continuity_dt.unwrap_or(1e-3 / omega0);
                rec.number("continuity.dt", dt);
                rec.check(Check::at_most("continuity", observables::continuity_residual(&s, t0, dt)?, tol.continuity));
            }
            Diagnostic::Transport => {
                let t1 = *cfg.times.last().expect("times");
                let v = observables::transport_speed(&s, t0, t1)?;
                rec.number("transport.speed", v);
                rec.number("transport.group_speed_oracle", vector::norm(mode_space::spectral_current(&s)));
                rec.check(Check::at_most("transport", (v - 1.0).abs(), tol.transport));
            }
            Diagnostic::Widths => {
                let mut kinds = vec![DensityKind::Number];
                if s.pure_helicity().is_some() {
                    kinds.extend([DensityKind::BbEnergy, DensityKind::LpNumber]);
                }
                let widths = observables::localization_widths(&density_fields(&s, t0, &kinds)?)?;
                for (k, w) in &widths {
                    rec.number(format!("width.{}", k.name()), w.radius * u.scale(Dimension::Length));
                    rec.metric(format!("width.{}.box_limited", k.name()), w.box_limited);
                }
                let finite = widths.values().all(|w| w.radius.is_finite());
                rec.check(Check { name: "widths_finite".into(), value: if finite { 0.0 } else { 1.0 }, tol: 0.0, pass: finite });
            }
            Diagnostic::Lightcone => {
                let r = cfg.leak_radius.expect("validated");
                for (it, &t) in cfg.times.iter().enumerate() {
                    rec.number(format!("t{it:03}.lightcone_leak"), observables::lightcone_leak(&s, r, t)?);
                }
            }
        }
    }
    Ok(())
}

/// Source box holding a dipole of radius `a` with a 6-cell margin.
pub fn dipole_grid(a: f64, cell: f64) -> Result<SpatialGrid> {
    let n = (2.0 * a / cell).ceil() as usize + 6;
    let o = -0.5 * (n - 1) as f64 * cell;
    SpatialGrid::new([n; 3], [cell; 3], [o; 3])
}

fn run_retarded(r: &RetardedSpec, cfg: &ScenarioConfig, opts: &RunOptions, rec: &mut Recorder) -> Result<()> {
    let SourceSpec::Dipole { radius, moment, omega, cell, dt, window } = r.source;
    let n_t = ((window.1 - window.0) / dt).ceil() as usize + 1;
    let src = retarded::dipole_source(dipole_grid(radius, cell)?, radius, moment, omega, window.0, dt, n_t)?;
    rec.metric("retarded.source_cells", src.active_cells().len());
    rec.metric("retarded.source_slices", src.slice_count());
    rec.check(Check::at_most("conservation", src.conservation_residual()?, cfg.tolerances.conservation));
    let lattice = SpatialGrid::new(r.lattice_n, r.lattice_spacing, r.lattice_origin)?;
    let ropts = RetardedOptions { threads: opts.threads, ..Default::default() };
    let pf = retarded::retarded_potential(&src, EvalPoints::Lattice(lattice.clone()), &r.times, &ropts)?;
    if r.times.len() >= 4 && r.lattice_n.iter().all(|n| *n >= 3) {
        rec.check(Check::at_most("gauge", retarded::gauge_residual(&pf)?, cfg.tolerances.gauge));
    } else {
        info!("gauge check skipped: needs >= 4 times and >= 3 lattice points per axis");
    }
    for (it, &t) in r.times.iter().enumerate() {
        let data = (0..4).map(|c| (0..lattice.len()).map(|j| pf.value(it, j)[c]).collect()).collect();
        let a = ArrayFile {
            kind: "potential".into(),
            shape: r.lattice_n,
            components: 4,
            units: "natural".into(),
            t,
            origin: r.lattice_origin,
            spacing: r.lattice_spacing,
            data,
        };
        rec.write(format!("potential_t{it:03}.bin"), &a.to_bytes())?;
    }
    Ok(())
}

/// Digest of the parsed config, independent of where its output directory lives.
pub fn config_digest(cfg: &ScenarioConfig) -> String {
    let mut c = cfg.clone();
    c.outputs.dir = PathBuf::new();
    sha256_hex(format!("{c:?}").as_bytes())
}

/// Runs every requested computation, writes artifacts, then the summary.
/// Failed checks are reported in the outcome, not as errors.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let mut rec = Recorder { dir: cfg.outputs.dir.clone(), metrics: Vec::new(), checks: Vec::new(), artifacts: Vec::new() };
    info!("density sign calibration: {:?}", densities::sign_calibration());
    if cfg.packet.is_some() {
        run_packet(cfg, &mut rec)?;
    }
    if let Some(r) = &cfg.retarded {
        run_retarded(r, cfg, opts, &mut rec)?;
    }
    let mut out = String::new();
    let mut line = |k: &str, v: &str| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    };
    line("format", "photonlab-summary v1");
    line("version", VERSION);
    line("config_sha256", &config_digest(cfg));
    line("units", cfg.units.name());
    if let UnitSystem::Si { length_m } = cfg.units {
        line("units.length_m", &fmt_f64(length_m));
    }
    line("seed", &cfg.seed.to_string());
    for (k, v) in &rec.metrics {
        line(&format!("metric.{k}"), v);
    }
    for c in &rec.checks {
        line(&format!("check.{}", c.name), &format!("value={} tol={} pass={}", fmt_f64(c.value), fmt_f64(c.tol), c.pass));
    }
    for a in &rec.artifacts {
        line(&format!("artifact.{}", a.file), &format!("sha256={} bytes={}", a.sha256, a.bytes));
    }
    let failed: Vec<&str> = rec.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        line("failed", &failed.join(","));
    }
    line("status", if failed.is_empty() { "pass" } else { "fail" });
    if cfg.outputs.summary {
        export::write_atomic(&rec.dir.join(SUMMARY_FILE), out.as_bytes())?;
    }
    Ok(RunOutcome { dir: rec.dir, metrics: rec.metrics, checks: rec.checks, artifacts: rec.artifacts, summary: out })
}

/// Writes one CSV slice of `kind` at the first configured time and returns its path.
pub fn export_slice(cfg: &ScenarioConfig, kind: DensityKind, plane: Plane) -> Result<PathBuf> {
    let s = build_spectrum(cfg)?;
    let t = *cfg.times.first().ok_or_else(|| Error::InvalidArgument("no times".into()))?;
    let d = density_fields(&s, t, &[kind])?.remove(0);
    let csv = export::slice_csv(&d, plane.axis, plane.value, cfg.units);
    let path = cfg.outputs.dir.join(format!("slice_{}_{}.csv", kind.name(), plane_tag(&plane)));
    export::write_atomic(&path, csv.as_bytes())?;
    Ok(path)
}

/// Parses the file at `path` and runs it.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    run_scenario(&ScenarioConfig::load(path)?, opts)
}
