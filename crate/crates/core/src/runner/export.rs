//! Array and slice files.
//!
//! Binary arrays are one ASCII header line followed by little-endian f64 data,
//! component-major then row-major in `(x, y, z)` with `z` fastest:
//!
//! ```text
//! photonlab-array v1 kind=number dtype=f64le shape=16,16,16 components=1 units=1/l^3 t=0 origin=-6.2,-6.2,-6.2 spacing=0.78,0.78,0.78
//! ```
//!
//! Slices are CSV with the two in-plane coordinates followed by components.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::densities::DensityField;
use crate::error::{Error, Result};
use crate::synthesis::SpatialGrid;
use crate::units::{Dimension, UnitSystem};
use crate::vector::Vec3;

pub const MAGIC: &str = "photonlab-array v1";

/// Shortest decimal that round-trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_vec3(v: Vec3) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

/// Writes through a sibling temp file then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        e.into()
    })
}

/// A decoded array file.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayFile {
    pub kind: String,
    pub shape: [usize; 3],
    pub components: usize,
    pub units: String,
    pub t: f64,
    pub origin: Vec3,
    pub spacing: Vec3,
    pub data: Vec<Vec<f64>>,
}

impl ArrayFile {
    pub fn from_density(d: &DensityField, units: UnitSystem) -> Self {
        let dim = Dimension::of_density(d.kind);
        let scale = units.scale(dim);
        let lscale = units.scale(Dimension::Length);
        Self {
            kind: d.kind.name().to_string(),
            shape: d.grid.n_per_axis(),
            components: d.data.components().len(),
            units: units.label(dim).to_string(),
            t: d.t * units.scale(Dimension::Time),
            origin: d.grid.origin().map(|x| x * lscale),
            spacing: d.grid.delta_x().map(|x| x * lscale),
            data: d.data.components().iter().map(|c| c.iter().map(|v| v * scale).collect()).collect(),
        }
    }

    pub fn header(&self) -> String {
        format!(
            "{MAGIC} kind={} dtype=f64le shape={},{},{} components={} units={} t={} origin={} spacing={}\n",
            self.kind,
            self.shape[0],
            self.shape[1],
            self.shape[2],
            self.components,
            self.units,
            fmt_f64(self.t),
            fmt_vec3(self.origin),
            fmt_vec3(self.spacing),
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header().into_bytes();
        for comp in &self.data {
            for v in comp {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::InvalidArgument(format!("array file: {m}"));
        let nl = bytes.iter().position(|b| *b == b'\n').ok_or_else(|| bad("missing header line"))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
        let rest = header.strip_prefix(MAGIC).ok_or_else(|| bad("bad magic"))?;
        let mut fields = std::collections::BTreeMap::new();
        for tok in rest.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad("malformed header field"))?;
            fields.insert(k, v);
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| bad(&format!("missing `{k}`")));
        if get("dtype")? != "f64le" {
            return Err(bad("unsupported dtype"));
        }
        let nums = |k: &str| -> Result<Vec<f64>> {
            get(k)?.split(',').map(|s| s.parse::<f64>().map_err(|_| bad(&format!("bad `{k}`")))).collect()
        };
        let vec3 = |k: &str| -> Result<Vec3> {
            let v = nums(k)?;
            <[f64; 3]>::try_from(v.as_slice()).map_err(|_| bad(&format!("`{k}` needs 3 values")))
        };
        let shape: Vec<usize> =
            get("shape")?.split(',').map(|s| s.parse().map_err(|_| bad("bad shape"))).collect::<Result<_>>()?;
        let shape: [usize; 3] = shape.try_into().map_err(|_| bad("shape needs 3 values"))?;
        let components: usize = get("components")?.parse().map_err(|_| bad("bad components"))?;
        let t: f64 = get("t")?.parse().map_err(|_| bad("bad t"))?;
        let n: usize = shape.iter().product();
        let body = &bytes[nl + 1..];
        if body.len() != 8 * n * components {
            return Err(bad(&format!("expected {} data bytes, found {}", 8 * n * components, body.len())));
        }
        let values: Vec<f64> = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self {
            kind: get("kind")?.to_string(),
            shape,
            components,
            units: get("units")?.to_string(),
            t,
            origin: vec3("origin")?,
            spacing: vec3("spacing")?,
            data: values.chunks(n.max(1)).take(components).map(|c| c.to_vec()).collect(),
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read(path)?)
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.shape, self.spacing, self.origin)
    }
}

/// Index of the grid layer nearest to `value` along `axis` (periodic).
pub fn nearest_layer(grid: &SpatialGrid, axis: usize, value: f64) -> usize {
    let n = grid.n_per_axis()[axis];
    let dx = grid.delta_x()[axis];
    let raw = ((value - grid.origin()[axis]) / dx).round();
    raw.rem_euclid(n as f64) as usize % n
}

/// CSV of one plane: `u,v,c0[,c1,c2,...]` with `u`, `v` the remaining axes.
pub fn slice_csv(d: &DensityField, axis: usize, value: f64, units: UnitSystem) -> String {
    let g = &d.grid;
    let n = g.n_per_axis();
    let layer = nearest_layer(g, axis, value);
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let names = ["x", "y", "z"];
    let comps = d.data.components();
    let scale = units.scale(Dimension::of_density(d.kind));
    let lscale = units.scale(Dimension::Length);
    let mut out = String::new();
    let at = layer as f64 * g.delta_x()[axis] + g.origin()[axis];
    let _ = writeln!(
        out,
        "# kind={} t={} plane={}={} units={}",
        d.kind.name(),
        fmt_f64(d.t * units.scale(Dimension::Time)),
        names[axis],
        fmt_f64(at * lscale),
        units.label(Dimension::of_density(d.kind))
    );
    let mut head = format!("{},{}", names[u], names[v]);
    for c in 0..comps.len() {
        let _ = write!(head, ",c{c}");
    }
    let _ = writeln!(out, "{head}");
    for i in 0..n[u] {
        for j in 0..n[v] {
            let mut idx3 = [0; 3];
            idx3[axis] = layer;
            idx3[u] = i;
            idx3[v] = j;
            let idx = g.index(idx3);
            let p = g.point(idx);
            let mut row = format!("{},{}", fmt_f64(p[u] * lscale), fmt_f64(p[v] * lscale));
            for c in &comps {
                let _ = write!(row, ",{}", fmt_f64(c[idx] * scale));
            }
            let _ = writeln!(out, "{row}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{DensityData, DensityKind};

    fn field() -> DensityField {
        let grid = SpatialGrid::new([2, 3, 4], [0.5, 0.25, 1.0], [-1.0, 0.0, 2.0]).unwrap();
        let data = (0..grid.len()).map(|i| i as f64 * 0.1 - 0.7).collect();
        DensityField { kind: DensityKind::Number, t: 1.5, grid, data: DensityData::Scalar(data) }
    }

    #[test]
    fn array_round_trip_is_bit_exact() {
        let a = ArrayFile::from_density(&field(), UnitSystem::Natural);
        let bytes = a.to_bytes();
        let b = ArrayFile::parse(&bytes).unwrap();
        assert_eq!(a, b);
        assert!(a.header().starts_with("photonlab-array v1 kind=number dtype=f64le shape=2,3,4 components=1"));
        let mut truncated = bytes.clone();
        truncated.pop();
        assert!(ArrayFile::parse(&truncated).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("photonlab-export-{}", std::process::id()));
        let p = dir.join("a.bin");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn slice_picks_nearest_layer() {
        let f = field();
        let csv = slice_csv(&f, 2, 4.1, UnitSystem::Natural);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].contains("plane=z=4.0"), "{}", lines[0]);
        assert_eq!(lines[1], "x,y,c0");
        assert_eq!(lines.len(), 2 + 2 * 3);
        // (i, j, k) = (0, 0, 2) -> flat index 2.
        assert_eq!(lines[2], format!("-1.0,0.0,{}", fmt_f64(2.0 * 0.1 - 0.7)));
        assert_eq!(nearest_layer(&f.grid, 2, 2.0 + 4.0), 0);
    }
}
