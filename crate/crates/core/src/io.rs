//! On-disk formats: the `TDSM` trace container, its JSON sidecar, CSV
//! exports and PGM previews.
//!
//! `TDSM` layout, little-endian: magic `b"TDSM"`, `u32` version (1), `u32`
//! dim, `u32` n_sources, `u32` n_receivers, `u32` n_steps, `f64` dt, then
//! `n_sources · n_receivers · n_steps` `f64` samples (source, receiver,
//! step; step fastest).

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{Provenance, TimeSeries};
use crate::geometry::{Dim, Point};
use crate::imaging::ImagingGrid;
use crate::signals::TimeGrid;

pub const MAGIC: &[u8; 4] = b"TDSM";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 5 * 4 + 8;

/// Encodes a series in the `TDSM` layout.
pub fn encode_timeseries(ts: &TimeSeries) -> Vec<u8> {
    let total: usize = ts.data.iter().map(Vec::len).sum();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * total);
    out.extend_from_slice(MAGIC);
    for v in [
        FORMAT_VERSION,
        ts.dim.as_usize() as u32,
        ts.n_sources() as u32,
        ts.n_receivers as u32,
        ts.grid.n_steps as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&ts.grid.dt.to_le_bytes());
    for v in ts.data.iter().flatten() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a `TDSM` buffer. Provenance is reset to clean; the sidecar
/// carries it.
pub fn decode_timeseries(bytes: &[u8]) -> Result<TimeSeries> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("file too short for a header ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected TDSM".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let version = word(0);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let dim = Dim::try_from(word(1) as u8).map_err(|e| Error::Format(e.to_string()))?;
    let (ns, nm, nt) = (word(2) as usize, word(3) as usize, word(4) as usize);
    let dt = f64::from_le_bytes(bytes[24..32].try_into().unwrap());
    let expected = ns
        .checked_mul(nm)
        .and_then(|v| v.checked_mul(nt))
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    if bytes.len() - HEADER_LEN != expected {
        return Err(Error::Format(format!(
            "payload is {} bytes, header implies {expected}",
            bytes.len() - HEADER_LEN
        )));
    }
    let grid = TimeGrid::new(dt, nt).map_err(|e| Error::Format(e.to_string()))?;
    let mut samples = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let data: Vec<Vec<f64>> = (0..ns).map(|_| samples.by_ref().take(nm * nt).collect()).collect();
    TimeSeries::from_raw(dim, grid, nm, data).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_timeseries(path: impl AsRef<Path>, ts: &TimeSeries) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_timeseries(ts))?;
    Ok(())
}

pub fn read_timeseries(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    decode_timeseries(&buf)
}

/// JSON sidecar stored next to a `TDSM` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub dim: Dim,
    pub dt: f64,
    pub n_steps: usize,
    pub n_sources: usize,
    pub n_receivers: usize,
    pub background_speed: f64,
    pub provenance: Provenance,
    pub receivers: Vec<Point>,
    pub receiver_weights: Vec<f64>,
    pub sources: Vec<Point>,
    pub signal: String,
    pub synthesis_sigma: f64,
    pub config_sha256: Option<String>,
    /// The configuration document the data were synthesized from.
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

impl DatasetMeta {
    /// Checks that the sidecar describes `ts`.
    pub fn check(&self, ts: &TimeSeries) -> Result<()> {
        if self.dim != ts.dim
            || self.n_steps != ts.grid.n_steps
            || self.n_sources != ts.n_sources()
            || self.n_receivers != ts.n_receivers
            || self.dt != ts.grid.dt
        {
            return Err(Error::Format("sidecar does not match the trace file".into()));
        }
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// One row per source and receiver: `source,receiver,<t_1>,<t_2>,...`.
pub fn timeseries_csv(ts: &TimeSeries) -> String {
    let mut out = String::from("source,receiver");
    for t in ts.grid.times() {
        let _ = write!(out, ",{t:.16e}");
    }
    out.push('\n');
    for s in 0..ts.n_sources() {
        for m in 0..ts.n_receivers {
            let _ = write!(out, "{s},{m}");
            for v in ts.trace(s, m) {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
    }
    out
}

/// `x,y[,z],value` rows in grid order.
pub fn grid_csv(g: &ImagingGrid) -> String {
    let three = g.grid.dim == Dim::Three;
    let mut out = String::from(if three { "x,y,z,value\n" } else { "x,y,value\n" });
    for (l, v) in g.values.iter().enumerate() {
        let p = g.grid.point(l);
        if three {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", p.x(), p.y(), p.z(), v);
        } else {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", p.x(), p.y(), v);
        }
    }
    out
}

/// Parses the output of [`grid_csv`] back into values.
pub fn parse_grid_csv(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.rsplit(',')
                .next()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Format(format!("bad grid row: {l}")))
        })
        .collect()
}

/// Binary PGM of a 2D grid (or the middle `z` slice of a 3D grid), scaled
/// to the grid maximum. Row 0 is the largest `y`.
pub fn grid_pgm(g: &ImagingGrid) -> Vec<u8> {
    let n = g.grid.n_per_axis;
    let k = if g.grid.dim == Dim::Three { n / 2 } else { 0 };
    let max = g.max();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for row in 0..n {
        let j = n - 1 - row;
        for i in 0..n {
            let v = g.values[g.grid.linear([i, j, k])];
            out.push((v.max(0.0) * scale).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}
