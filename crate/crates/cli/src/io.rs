//! Dataset and coreset files.
//!
//! Binary layout: `CKZ1`, `u64 n`, `u64 d`, `u8 has_weights`, then `n·d`
//! little-endian `f64` coordinates row-major and optionally `n` weights.
//! Coresets are stored the same way with weights, plus a sidecar
//! `<file>.meta.json` holding their metadata.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use coreset_core::codec;
use coreset_core::{CoresetMeta, PointSet, WeightedCoreset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Bin,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "bin" => Ok(Format::Bin),
            other => bail!("unknown format `{other}` (expected csv or bin)"),
        }
    }

    /// `forced` if given, else `.csv` files are CSV and everything else binary.
    pub fn resolve(path: &Path, forced: Option<&str>) -> Result<Self> {
        if let Some(f) = forced {
            return Self::parse(f);
        }
        let csv = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        Ok(if csv { Format::Csv } else { Format::Bin })
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    pub header: bool,
    pub weights: bool,
}

pub fn read_dataset(path: &Path, format: Format, csv: CsvOptions) -> Result<PointSet> {
    let ps = match format {
        Format::Bin => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            PointSet::from_bytes(&bytes)?
        }
        Format::Csv => read_csv(path, csv)?,
    };
    Ok(ps)
}

fn read_csv(path: &Path, opts: CsvOptions) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    let mut width = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), row + 1))?;
        let values = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| anyhow!("{}: row {}: {e}", path.display(), row + 1))?;
        let cols = if opts.weights { values.len().saturating_sub(1) } else { values.len() };
        match width {
            None => width = Some(cols),
            Some(w) if w != cols => bail!("{}: row {} has {cols} coordinates, expected {w}", path.display(), row + 1),
            _ => {}
        }
        coords.extend_from_slice(&values[..cols]);
        if opts.weights {
            weights.push(values[cols]);
        }
    }
    let d = width.ok_or_else(|| anyhow!("{} holds no rows", path.display()))?;
    let ps = if opts.weights {
        PointSet::with_multiplicity(d, coords, weights)?
    } else {
        PointSet::new(d, coords)?
    };
    Ok(ps)
}

/// Writes CSV without a header; a weight column is appended when the set
/// carries multiplicities. Values use the shortest round-trip formatting.
fn write_csv(path: &Path, rows: &[f64], d: usize, weights: Option<&[f64]>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    for (i, row) in rows.chunks_exact(d).enumerate() {
        let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
        if let Some(ws) = weights {
            rec.push(ws[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(path: &Path, ps: &PointSet, format: Format) -> Result<()> {
    match format {
        Format::Bin => fs::write(path, ps.to_bytes()).with_context(|| format!("writing {}", path.display())),
        Format::Csv => write_csv(path, ps.coords(), ps.dim(), ps.multiplicities()),
    }
}

pub fn meta_path(coreset: &Path) -> PathBuf {
    let mut s = coreset.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn coreset_bytes(s: &WeightedCoreset) -> Vec<u8> {
    codec::encode(s.len(), s.dim(), s.coords(), Some(s.weights()))
}

/// Writes the weighted table and, if `meta` is given, the sidecar JSON.
pub fn write_coreset(path: &Path, s: &WeightedCoreset, format: Format, meta: Option<&serde_json::Value>) -> Result<()> {
    match format {
        Format::Bin => fs::write(path, coreset_bytes(s)).with_context(|| format!("writing {}", path.display()))?,
        Format::Csv => write_csv(path, s.coords(), s.dim(), Some(s.weights()))?,
    }
    if let Some(meta) = meta {
        let side = meta_path(path);
        fs::write(&side, serde_json::to_vec_pretty(meta)?).with_context(|| format!("writing {}", side.display()))?;
    }
    Ok(())
}

/// Reads a coreset. The last `offset_rows` rows named by the sidecar are the
/// offset-corrected centers; without a sidecar every negative row is taken
/// as one.
pub fn read_coreset(path: &Path, format: Format) -> Result<WeightedCoreset> {
    let (d, coords, weights) = match format {
        Format::Bin => {
            let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let raw = codec::decode(&bytes)?;
            let w = raw.weights.ok_or_else(|| anyhow!("{} has no weight block", path.display()))?;
            (raw.d, raw.coords, w)
        }
        Format::Csv => {
            let ps = read_csv(path, CsvOptions { header: false, weights: true })?;
            (ps.dim(), ps.coords().to_vec(), ps.multiplicities().map(<[f64]>::to_vec).unwrap_or_default())
        }
    };
    let side = meta_path(path);
    let meta: Option<CoresetMeta> = if side.exists() {
        let text = fs::read(&side).with_context(|| format!("reading {}", side.display()))?;
        let value: serde_json::Value = serde_json::from_slice(&text)?;
        let inner = value.get("coreset_meta").cloned().unwrap_or(value);
        Some(serde_json::from_value(inner).with_context(|| format!("parsing {}", side.display()))?)
    } else {
        None
    };
    let n = weights.len();
    let offset: Vec<bool> = match &meta {
        Some(m) => (0..n).map(|i| i + m.offset_rows >= n).collect(),
        None => weights.iter().map(|&w| w < 0.0).collect(),
    };
    let meta = match meta {
        Some(m) => m,
        None => {
            let stand_in = PointSet::new(d, coords.clone())?;
            CoresetMeta::new("unknown", &stand_in, coreset_core::Metric::kmeans())
        }
    };
    Ok(WeightedCoreset::new(d, coords, weights, offset, meta)?)
}
