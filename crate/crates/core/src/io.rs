//! On-disk formats: CSV series, JSON matrices and manifests, state snapshots.
//!
//! Numbers are written with Rust's own formatting, so output does not depend
//! on the locale.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::ObservableSeries;
use crate::core_sim::{PureState, LAYOUT};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub const SERIES_HEADER: &str = "t,d_omega,entropy";
pub const SERIES_HEADER_WITH_STD: &str = "t,d_omega,entropy,d_omega_std";

const SNAPSHOT_MAGIC: &[u8; 8] = b"WALKSNAP";

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `t,d_omega,entropy` rows, plus `d_omega_std` when given.
pub fn write_series_csv<W: Write>(out: W, series: &ObservableSeries, d_omega_std: Option<&[f64]>) -> Result<()> {
    if let Some(std) = d_omega_std {
        if std.len() != series.len() {
            return Err(Error::dimension(format!(
                "std column has {} rows, series has {}",
                std.len(),
                series.len()
            )));
        }
    }
    let mut out = BufWriter::new(out);
    writeln!(out, "{}", if d_omega_std.is_some() { SERIES_HEADER_WITH_STD } else { SERIES_HEADER })?;
    for t in series.times() {
        write!(out, "{t},{},{}", format_f64(series.d_omega()[t]), format_f64(series.entropy()[t]))?;
        if let Some(std) = d_omega_std {
            write!(out, ",{}", format_f64(std[t]))?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Parsed series CSV: the series and the optional std column.
pub fn read_series_csv<R: Read>(input: R) -> Result<(ObservableSeries, Option<Vec<f64>>)> {
    let mut text = String::new();
    BufReader::new(input).read_to_string(&mut text)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let with_std = match header {
        SERIES_HEADER => false,
        SERIES_HEADER_WITH_STD => true,
        other => return Err(Error::config(format!("unexpected CSV header {other:?}"))),
    };
    let (mut d, mut h, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let want = if with_std { 4 } else { 3 };
        if fields.len() != want {
            return Err(Error::config(format!("row {row} has {} fields, expected {want}", fields.len())));
        }
        if fields[0].parse::<usize>().ok() != Some(row) {
            return Err(Error::config(format!("row {row} has time {:?}", fields[0])));
        }
        let num = |f: &str| f.parse::<f64>().map_err(|e| Error::config(format!("row {row}: {e}")));
        d.push(num(fields[1])?);
        h.push(num(fields[2])?);
        if with_std {
            s.push(num(fields[3])?);
        }
    }
    let series = ObservableSeries::new(d, h, Default::default())?;
    Ok((series, with_std.then_some(s)))
}

/// Dense complex matrix as JSON: `rows`, `cols` and row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::dimension(format!(
                "{}x{} matrix with {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        let entries: Vec<Complex64> = self.data.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(CMatrix::from_row_slice(self.rows, self.cols, &entries))
    }
}

/// The two environment unitaries of a nonlocal walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentFile {
    pub e0: MatrixJson,
    pub e1: MatrixJson,
}

impl EnvironmentFile {
    pub fn new(e0: &CMatrix, e1: &CMatrix) -> Self {
        EnvironmentFile { e0: MatrixJson::from_matrix(e0), e1: MatrixJson::from_matrix(e1) }
    }

    pub fn matrices(&self) -> Result<(CMatrix, CMatrix)> {
        Ok((self.e0.to_matrix()?, self.e1.to_matrix()?))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// JSON form of a state snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotJson {
    pub sites: usize,
    pub env_dim: usize,
    pub layout: String,
    pub amplitudes: Vec<[f64; 2]>,
}

impl SnapshotJson {
    pub fn from_state(state: &PureState) -> Self {
        SnapshotJson {
            sites: state.sites(),
            env_dim: state.env_dim(),
            layout: LAYOUT.to_string(),
            amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_state(&self) -> Result<PureState> {
        check_layout(&self.layout)?;
        let amps = self.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        PureState::new(self.sites, self.env_dim, amps)
    }
}

fn check_layout(layout: &str) -> Result<()> {
    if layout != LAYOUT {
        return Err(Error::config(format!("snapshot layout {layout:?}, expected {LAYOUT:?}")));
    }
    Ok(())
}

/// Binary snapshot: magic `WALKSNAP`, `d_S` and `d_E` as u64, the layout
/// string behind its u32 length, then `(re, im)` pairs. All little-endian.
pub fn write_snapshot<W: Write>(out: W, state: &PureState) -> Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&(state.sites() as u64).to_le_bytes())?;
    out.write_all(&(state.env_dim() as u64).to_le_bytes())?;
    out.write_all(&(LAYOUT.len() as u32).to_le_bytes())?;
    out.write_all(LAYOUT.as_bytes())?;
    for z in state.amplitudes() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(input: R) -> Result<PureState> {
    let mut input = BufReader::new(input);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::config("not a walk snapshot"));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let sites = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let env_dim = u64::from_le_bytes(word) as usize;
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut layout = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut layout)?;
    check_layout(&String::from_utf8_lossy(&layout))?;
    let dim = sites
        .checked_mul(2)
        .and_then(|x| x.checked_mul(env_dim))
        .ok_or_else(|| Error::config("snapshot dimensions overflow"))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != dim * 16 {
        return Err(Error::config(format!(
            "snapshot body has {} bytes, expected {}",
            bytes.len(),
            dim * 16
        )));
    }
    let amps = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8-byte chunk"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8-byte chunk"));
            Complex64::new(re, im)
        })
        .collect();
    PureState::new(sites, env_dim, amps)
}

/// Everything needed to rerun a CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// The fully resolved parameter set (config file merged with flags).
    pub params: serde_json::Value,
    pub base_seed: Option<u64>,
    /// Stream id of every sample: sample `k` draws from ChaCha20 keyed by
    /// `base_seed` on stream `k`.
    pub sample_streams: Vec<u64>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, base_seed: Option<u64>, samples: usize) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        RunManifest {
            command: command.to_string(),
            params,
            base_seed,
            sample_streams: (0..samples as u64).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            outputs: Vec::new(),
        }
    }
}
