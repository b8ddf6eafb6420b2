//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! grid.n = 64,64,64
//! grid.dk = 0.5
//! grid.center = 0,0,10
//! packet.kind = gaussian
//! packet.k0 = 0,0,10
//! packet.sigma = 1
//! time.t_list = 0,0.5,1
//! outputs.densities = number,energy
//! ```
//!
//! Keys are dotted, arrays are comma lists, complex numbers are `re,im`.
//! Unknown or repeated keys are errors that name the line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::densities::DensityKind;
use crate::error::{Error, Result};
use crate::units::UnitSystem;
use crate::vector::{Vec3, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridPlacement {
    KMin(Vec3),
    /// Samples straddle the centre (see `WaveVectorGrid::straddled`).
    Center(Vec3),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub n: [usize; 3],
    pub dk: Vec3,
    pub placement: GridPlacement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PacketKind {
    Gaussian,
    SingleMode,
    Localized,
    Collinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PacketProfile {
    /// `w_λ·exp(-|k-k0|²/4σ²)` on the helicity basis.
    #[default]
    Plain,
    /// Projected onto the polarization at `k0`; smooth, no vortex core.
    Polarized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PacketSpec {
    pub kind: PacketKind,
    pub profile: PacketProfile,
    pub k0: Vec3,
    pub sigma: f64,
    pub weights: [C64; 2],
    pub x0: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diagnostic {
    Continuity,
    Transport,
    Widths,
    Lightcone,
}

impl Diagnostic {
    pub fn name(self) -> &'static str {
        match self {
            Diagnostic::Continuity => "continuity",
            Diagnostic::Transport => "transport",
            Diagnostic::Widths => "widths",
            Diagnostic::Lightcone => "lightcone",
        }
    }
}

/// A plane `axis = value` for CSV slices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    pub axis: usize,
    pub value: f64,
}

impl Plane {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let (axis, value) = text.split_once('=').ok_or_else(|| format!("plane `{text}` must look like z=0.5"))?;
        let axis = match axis.trim() {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            other => return Err(format!("unknown plane axis `{other}`")),
        };
        let value = parse_f64(value)?;
        Ok(Plane { axis, value })
    }

    pub fn label(&self) -> String {
        format!("{}={}", ["x", "y", "z"][self.axis], self.value)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub densities: Vec<DensityKind>,
    pub slice_planes: Vec<Plane>,
    pub summary: bool,
    pub dir: PathBuf,
    pub diagnostics: Vec<Diagnostic>,
}

/// Check tolerances; defaults follow the documented acceptance levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub number: f64,
    pub energy: f64,
    pub momentum: f64,
    pub helicity: f64,
    pub continuity: f64,
    pub transport: f64,
    pub synthesis: f64,
    pub conservation: f64,
    pub gauge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            number: 1e-8,
            energy: 1e-8,
            momentum: 1e-8,
            helicity: 1e-6,
            continuity: 1e-5,
            transport: 0.01,
            synthesis: 1e-10,
            conservation: 1e-3,
            gauge: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    /// Smeared oscillating dipole along `z`.
    Dipole { radius: f64, moment: f64, omega: f64, cell: f64, dt: f64, window: (f64, f64) },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetardedSpec {
    pub source: SourceSpec,
    pub lattice_n: [usize; 3],
    pub lattice_spacing: Vec3,
    pub lattice_origin: Vec3,
    pub times: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub grid: Option<GridSpec>,
    pub packet: Option<PacketSpec>,
    pub retarded: Option<RetardedSpec>,
    pub times: Vec<f64>,
    pub outputs: OutputSpec,
    pub units: UnitSystem,
    pub tolerances: Tolerances,
    pub continuity_dt: Option<f64>,
    pub leak_radius: Option<f64>,
    pub seed: u64,
}

const KEYS: &[&str] = &[
    "grid.n",
    "grid.dk",
    "grid.k_min",
    "grid.center",
    "packet.kind",
    "packet.profile",
    "packet.k0",
    "packet.sigma",
    "packet.weight_plus",
    "packet.weight_minus",
    "packet.x0",
    "time.t_list",
    "time.t0",
    "time.t1",
    "time.steps",
    "outputs.densities",
    "outputs.slice_planes",
    "outputs.summary",
    "outputs.dir",
    "outputs.diagnostics",
    "diagnostics.continuity_dt",
    "diagnostics.leak_radius",
    "retarded.source",
    "retarded.dipole_radius",
    "retarded.dipole_moment",
    "retarded.omega",
    "retarded.cell",
    "retarded.dt",
    "retarded.window",
    "retarded.lattice_n",
    "retarded.lattice_spacing",
    "retarded.lattice_origin",
    "retarded.times",
    "units.system",
    "units.length_m",
    "tolerances.number",
    "tolerances.energy",
    "tolerances.momentum",
    "tolerances.helicity",
    "tolerances.continuity",
    "tolerances.transport",
    "tolerances.synthesis",
    "tolerances.conservation",
    "tolerances.gauge",
    "seed",
];

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_f64).collect()
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    match parse_list(s)?.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        other => Err(format!("expected 3 comma-separated numbers, got {}", other.len())),
    }
}

/// One number is broadcast to all three axes.
fn parse_vec3_or_scalar(s: &str) -> std::result::Result<Vec3, String> {
    match parse_list(s)?.as_slice() {
        [v] => Ok([*v; 3]),
        [x, y, z] => Ok([*x, *y, *z]),
        other => Err(format!("expected 1 or 3 comma-separated numbers, got {}", other.len())),
    }
}

fn parse_usize3(s: &str) -> std::result::Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("`{}` is not a non-negative integer", p.trim())))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        other => Err(format!("expected 3 integers, got {}", other.len())),
    }
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    match parse_list(s)?.as_slice() {
        [re] => Ok(C64::new(*re, 0.0)),
        [re, im] => Ok(C64::new(*re, *im)),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v <= 0.0 {
        return Err(format!("must be positive, got {v}"));
    }
    Ok(v)
}

fn words(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|w| !w.is_empty())
}

struct Raw {
    entries: BTreeMap<&'static str, (usize, String)>,
}

impl Raw {
    fn get<T>(&self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, value)) => {
                parse(value).map(Some).map_err(|m| Error::Config { line: *line, message: format!("{key}: {m}") })
            }
        }
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map(|e| e.0).unwrap_or(0)
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn require<T>(&self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        self.get(key, parse)?.ok_or_else(|| Error::Config { line: 0, message: format!("missing key {key}") })
    }
}

fn conflict(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

impl ScenarioConfig {
    /// Parses a scenario; `outputs.dir` and file paths stay relative.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| conflict(line, format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            let known = KEYS.iter().find(|k| **k == key).ok_or_else(|| conflict(line, format!("unknown key `{key}`")))?;
            if let Some((first, _)) = entries.insert(*known, (line, value.trim().to_string())) {
                return Err(conflict(line, format!("key `{key}` repeated (first on line {first})")));
            }
        }
        let raw = Raw { entries };
        let grid = Self::grid(&raw)?;
        let packet = Self::packet(&raw)?;
        if packet.is_some() && grid.is_none() {
            return Err(conflict(raw.line("packet.kind"), "a packet needs grid.n and grid.dk"));
        }
        let retarded = Self::retarded(&raw)?;
        if packet.is_none() && retarded.is_none() {
            return Err(conflict(0, "nothing to run: set packet.kind and/or retarded.source"));
        }
        let times = Self::times(&raw, packet.is_some())?;
        let outputs = Self::outputs(&raw)?;
        if outputs.diagnostics.contains(&Diagnostic::Lightcone) && !raw.has("diagnostics.leak_radius") {
            return Err(conflict(raw.line("outputs.diagnostics"), "lightcone diagnostic needs diagnostics.leak_radius"));
        }
        if packet.is_none() && (!outputs.densities.is_empty() || !outputs.diagnostics.is_empty()) {
            return Err(conflict(
                raw.line("outputs.densities").max(raw.line("outputs.diagnostics")),
                "densities and diagnostics need a packet",
            ));
        }
        let units = match raw.get("units.system", |s| Ok(s.trim().to_string()))?.as_deref() {
            None | Some("natural") => {
                if raw.has("units.length_m") {
                    return Err(conflict(raw.line("units.length_m"), "units.length_m requires units.system = si"));
                }
                UnitSystem::Natural
            }
            Some("si") => {
                let l = raw.require("units.length_m", parse_positive)?;
                UnitSystem::si(l).map_err(|e| conflict(raw.line("units.length_m"), e.to_string()))?
            }
            Some(other) => return Err(conflict(raw.line("units.system"), format!("unknown unit system `{other}`"))),
        };
        let mut tolerances = Tolerances::default();
        for (key, slot) in [
            ("tolerances.number", &mut tolerances.number),
            ("tolerances.energy", &mut tolerances.energy),
            ("tolerances.momentum", &mut tolerances.momentum),
            ("tolerances.helicity", &mut tolerances.helicity),
            ("tolerances.continuity", &mut tolerances.continuity),
            ("tolerances.transport", &mut tolerances.transport),
            ("tolerances.synthesis", &mut tolerances.synthesis),
            ("tolerances.conservation", &mut tolerances.conservation),
            ("tolerances.gauge", &mut tolerances.gauge),
        ] {
            if let Some(v) = raw.get(key, parse_positive)? {
                *slot = v;
            }
        }
        let seed = raw
            .get("seed", |s| s.trim().parse::<u64>().map_err(|_| format!("`{}` is not a non-negative integer", s.trim())))?
            .unwrap_or(0);
        Ok(Self {
            grid,
            packet,
            retarded,
            times,
            outputs,
            units,
            tolerances,
            continuity_dt: raw.get("diagnostics.continuity_dt", parse_positive)?,
            leak_radius: raw.get("diagnostics.leak_radius", parse_positive)?,
            seed,
        })
    }

    /// Reads and parses a file; a relative `outputs.dir` resolves against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if cfg.outputs.dir.is_relative() {
            cfg.outputs.dir = base.join(&cfg.outputs.dir);
        }
        Ok(cfg)
    }

    fn grid(raw: &Raw) -> Result<Option<GridSpec>> {
        let Some(n) = raw.get("grid.n", parse_usize3)? else {
            for key in ["grid.dk", "grid.k_min", "grid.center"] {
                if raw.has(key) {
                    return Err(conflict(raw.line(key), format!("{key} given without grid.n")));
                }
            }
            return Ok(None);
        };
        let dk = raw.require("grid.dk", parse_vec3_or_scalar)?;
        let placement = match (raw.get("grid.k_min", parse_vec3)?, raw.get("grid.center", parse_vec3)?) {
            (Some(k), None) => GridPlacement::KMin(k),
            (None, Some(c)) => GridPlacement::Center(c),
            (None, None) => return Err(conflict(raw.line("grid.n"), "set one of grid.k_min or grid.center")),
            (Some(_), Some(_)) => return Err(conflict(raw.line("grid.center"), "grid.k_min and grid.center are exclusive")),
        };
        Ok(Some(GridSpec { n, dk, placement }))
    }

    fn packet(raw: &Raw) -> Result<Option<PacketSpec>> {
        let kind = raw.get("packet.kind", |s| match s.trim() {
            "gaussian" => Ok(PacketKind::Gaussian),
            "single_mode" => Ok(PacketKind::SingleMode),
            "localized" => Ok(PacketKind::Localized),
            "collinear" => Ok(PacketKind::Collinear),
            other => Err(format!("unknown packet kind `{other}`")),
        })?;
        let Some(kind) = kind else {
            if let Some(key) = KEYS.iter().find(|k| k.starts_with("packet.") && raw.has(k)) {
                return Err(conflict(raw.line(key), format!("{key} given without packet.kind")));
            }
            return Ok(None);
        };
        let profile = raw
            .get("packet.profile", |s| match s.trim() {
                "plain" => Ok(PacketProfile::Plain),
                "polarized" => Ok(PacketProfile::Polarized),
                other => Err(format!("unknown profile `{other}`")),
            })?
            .unwrap_or_default();
        let needs_k0 = kind != PacketKind::Localized;
        let k0 =
            if needs_k0 { raw.require("packet.k0", parse_vec3)? } else { raw.get("packet.k0", parse_vec3)?.unwrap_or([0.0; 3]) };
        let needs_sigma = matches!(kind, PacketKind::Gaussian | PacketKind::Collinear);
        let sigma = if needs_sigma {
            raw.require("packet.sigma", parse_positive)?
        } else {
            raw.get("packet.sigma", parse_positive)?.unwrap_or(1.0)
        };
        let weights = [
            raw.get("packet.weight_plus", parse_complex)?.unwrap_or(C64::new(1.0, 0.0)),
            raw.get("packet.weight_minus", parse_complex)?.unwrap_or(C64::new(0.0, 0.0)),
        ];
        let x0 = raw.get("packet.x0", parse_vec3)?.unwrap_or([0.0; 3]);
        Ok(Some(PacketSpec { kind, profile, k0, sigma, weights, x0 }))
    }

    fn times(raw: &Raw, needed: bool) -> Result<Vec<f64>> {
        let list = raw.get("time.t_list", parse_list)?;
        let range = ["time.t0", "time.t1", "time.steps"].iter().any(|k| raw.has(k));
        match (list, range) {
            (Some(_), true) => Err(conflict(raw.line("time.t_list"), "time.t_list excludes time.t0/t1/steps")),
            (Some(list), false) => Ok(list),
            (None, true) => {
                let t0 = raw.require("time.t0", parse_f64)?;
                let t1 = raw.require("time.t1", parse_f64)?;
                let steps = raw.require("time.steps", |s| {
                    s.trim().parse::<usize>().map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
                })?;
                if steps == 0 {
                    return Ok(vec![t0]);
                }
                Ok((0..=steps).map(|i| t0 + (t1 - t0) * i as f64 / steps as f64).collect())
            }
            (None, false) if needed => Err(conflict(0, "missing time.t_list or time.t0/t1/steps")),
            (None, false) => Ok(Vec::new()),
        }
    }

    fn outputs(raw: &Raw) -> Result<OutputSpec> {
        let densities = raw
            .get("outputs.densities", |s| {
                let mut out = Vec::new();
                for w in words(s) {
                    match w {
                        "none" => {}
                        "all" => out.extend(DensityKind::ALL),
                        name => out.push(DensityKind::parse(name).ok_or_else(|| format!("unknown density `{name}`"))?),
                    }
                }
                out.sort();
                out.dedup();
                Ok(out)
            })?
            .unwrap_or_default();
        let slice_planes = raw
            .get("outputs.slice_planes", |s| words(s).map(Plane::parse).collect::<std::result::Result<Vec<_>, _>>())?
            .unwrap_or_default();
        let diagnostics = raw
            .get("outputs.diagnostics", |s| {
                let mut out = Vec::new();
                for w in words(s) {
                    out.push(match w {
                        "continuity" => Diagnostic::Continuity,
                        "transport" => Diagnostic::Transport,
                        "widths" => Diagnostic::Widths,
                        "lightcone" => Diagnostic::Lightcone,
                        "none" => continue,
                        other => return Err(format!("unknown diagnostic `{other}`")),
                    });
                }
                out.sort();
                out.dedup();
                Ok(out)
            })?
            .unwrap_or_default();
        Ok(OutputSpec {
            densities,
            slice_planes,
            summary: raw.get("outputs.summary", parse_bool)?.unwrap_or(true),
            dir: raw.get("outputs.dir", |s| Ok(PathBuf::from(s.trim())))?.unwrap_or_else(|| PathBuf::from("out")),
            diagnostics,
        })
    }

    fn retarded(raw: &Raw) -> Result<Option<RetardedSpec>> {
        let Some(source) = raw.get("retarded.source", |s| Ok(s.trim().to_string()))? else {
            if let Some(key) = KEYS.iter().find(|k| k.starts_with("retarded.") && raw.has(k)) {
                return Err(conflict(raw.line(key), format!("{key} given without retarded.source")));
            }
            return Ok(None);
        };
        if source != "dipole" {
            return Err(conflict(raw.line("retarded.source"), format!("retarded.source: expected `dipole`, got `{source}`")));
        }
        let window = raw.require("retarded.window", parse_list)?;
        let [w0, w1] = window.as_slice() else {
            return Err(conflict(raw.line("retarded.window"), "retarded.window: expected `start,end`"));
        };
        if w1 <= w0 {
            return Err(conflict(raw.line("retarded.window"), "retarded.window: end must exceed start"));
        }
        let source = SourceSpec::Dipole {
            radius: raw.require("retarded.dipole_radius", parse_positive)?,
            moment: raw.get("retarded.dipole_moment", parse_f64)?.unwrap_or(1.0),
            omega: raw.require("retarded.omega", parse_positive)?,
            cell: raw.require("retarded.cell", parse_positive)?,
            dt: raw.require("retarded.dt", parse_positive)?,
            window: (*w0, *w1),
        };
        let times = raw.require("retarded.times", parse_list)?;
        Ok(Some(RetardedSpec {
            source,
            lattice_n: raw.require("retarded.lattice_n", parse_usize3)?,
            lattice_spacing: raw.require("retarded.lattice_spacing", |s| {
                let v = parse_vec3_or_scalar(s)?;
                if v.iter().any(|x| *x <= 0.0) {
                    return Err("spacing must be positive".into());
                }
                Ok(v)
            })?,
            lattice_origin: raw.require("retarded.lattice_origin", parse_vec3)?,
            times,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "
# a packet
grid.n = 16,16,16
grid.dk = 0.5
grid.center = 0,0,4
packet.kind = gaussian
packet.k0 = 0,0,4
packet.sigma = 0.5   # spectral width
packet.weight_plus = 1,0.5
time.t0 = 0
time.t1 = 1
time.steps = 4
outputs.densities = number,energy
outputs.slice_planes = z=0, x=0.25
";

    #[test]
    fn parses_a_basic_scenario() {
        let c = ScenarioConfig::parse(BASIC).unwrap();
        let g = c.grid.unwrap();
        assert_eq!(g.n, [16; 3]);
        assert_eq!(g.dk, [0.5; 3]);
        assert_eq!(g.placement, GridPlacement::Center([0.0, 0.0, 4.0]));
        let p = c.packet.unwrap();
        assert_eq!(p.kind, PacketKind::Gaussian);
        assert_eq!(p.weights, [C64::new(1.0, 0.5), C64::new(0.0, 0.0)]);
        assert_eq!(c.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(c.outputs.densities, vec![DensityKind::Number, DensityKind::Energy]);
        assert_eq!(c.outputs.slice_planes, vec![Plane { axis: 2, value: 0.0 }, Plane { axis: 0, value: 0.25 }]);
        assert!(c.outputs.summary);
        assert_eq!(c.units, UnitSystem::Natural);
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let text = format!("{BASIC}packet.sigma_x = 2\n");
        let err = ScenarioConfig::parse(&text).unwrap_err();
        let Error::Config { line, message } = err else { panic!("{err}") };
        assert_eq!(line, BASIC.lines().count() + 1);
        assert!(message.contains("sigma_x"), "{message}");
    }

    #[test]
    fn malformed_values_and_conflicts() {
        for (patch, needle) in [
            ("grid.n = 16,16\n", "repeated"),
            ("seed = -3\n", "seed"),
            ("time.t_list = 0,1\n", "excludes"),
            ("grid.k_min = 0,0,0\n", "exclusive"),
            ("outputs.diagnostics = widths,banana\n", "banana"),
            ("outputs.diagnostics = lightcone\n", "leak_radius"),
            ("units.length_m = 1e-6\n", "units.system"),
        ] {
            let err = ScenarioConfig::parse(&format!("{BASIC}{patch}")).unwrap_err();
            assert!(err.to_string().contains(needle), "{patch}: {err}");
        }
        assert!(ScenarioConfig::parse("seed = 1\n").unwrap_err().to_string().contains("nothing to run"));
        assert!(ScenarioConfig::parse("just text\n").unwrap_err().to_string().contains("line 1"));
    }

    #[test]
    fn retarded_section() {
        let text = "
retarded.source = dipole
retarded.dipole_radius = 0.2
retarded.omega = 2
retarded.cell = 0.05
retarded.dt = 0.02
retarded.window = -8, 0.5
retarded.lattice_n = 3,3,3
retarded.lattice_spacing = 0.1
retarded.lattice_origin = 2.9,-0.1,2.9
retarded.times = 0,0.1,0.2,0.3
units.system = si
units.length_m = 1e-6
";
        let c = ScenarioConfig::parse(text).unwrap();
        let r = c.retarded.unwrap();
        assert!(matches!(r.source, SourceSpec::Dipole { window: (w0, w1), .. } if w0 == -8.0 && w1 == 0.5));
        assert_eq!(r.times.len(), 4);
        assert!(c.packet.is_none() && c.times.is_empty());
        assert_eq!(c.units, UnitSystem::Si { length_m: 1e-6 });
    }
}
