//! CSV and manifest output. Files are written to a temporary sibling and renamed
//! into place, so a final path never holds a partial file.

use crate::error::{ConfigError, SimError};
use crate::observables::{HistogramGrid, Series};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub engine: String,
    pub version: String,
    pub master_seed: u64,
    pub config: BTreeMap<String, String>,
    pub outputs: Vec<OutputEntry>,
    pub wall_seconds: f64,
    pub trajectories: usize,
    pub failed_trajectories: usize,
}

impl ExperimentManifest {
    pub fn new(command: &str, engine: &str, master_seed: u64, config: BTreeMap<String, String>) -> Self {
        ExperimentManifest {
            command: command.to_string(),
            engine: engine.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed,
            config,
            outputs: Vec::new(),
            wall_seconds: 0.0,
            trajectories: 0,
            failed_trajectories: 0,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn io_err(path: &Path, source: std::io::Error) -> SimError {
    SimError::Io { path: path.display().to_string(), source }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8], force: bool) -> Result<(), SimError> {
    if !force && path.exists() {
        return Err(ConfigError::Other(format!("{} exists; pass --force to overwrite", path.display())).into());
    }
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| io_err(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

/// Full double precision, 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `t,<name>,<name>_se,...` rows on the grid.
pub fn series_csv(grid: &[f64], columns: &[(&str, &Series)]) -> Result<String, SimError> {
    for (name, s) in columns {
        if s.mean.len() != grid.len() || s.se.len() != grid.len() {
            return Err(SimError::Grid(format!("column {name} has {} rows, grid has {}", s.mean.len(), grid.len())));
        }
    }
    let mut out = String::from("t");
    for (name, _) in columns {
        let _ = write!(out, ",{name},{name}_se");
    }
    out.push('\n');
    for (k, &t) in grid.iter().enumerate() {
        out.push_str(&fmt_f64(t));
        for (_, s) in columns {
            let _ = write!(out, ",{},{}", fmt_f64(s.mean[k]), fmt_f64(s.se[k]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Plain table with a header row.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Long format `<x>_bin,<y>_bin,density` with bin centers.
pub fn histogram_csv(h: &HistogramGrid, x: &str, y: &str) -> String {
    let mut out = format!("{x}_bin,{y}_bin,density\n");
    for (a, b, d) in h.rows() {
        let _ = writeln!(out, "{},{},{}", fmt_f64(a), fmt_f64(b), fmt_f64(d));
    }
    out
}

/// Writes `contents` under `dir` and records its checksum in the manifest.
pub fn write_output(dir: &Path, name: &str, contents: &str, manifest: &mut ExperimentManifest, force: bool) -> Result<PathBuf, SimError> {
    let path = dir.join(name);
    write_atomic(&path, contents.as_bytes(), force)?;
    manifest.outputs.retain(|o| o.file != name);
    manifest.outputs.push(OutputEntry { file: name.to_string(), sha256: sha256_hex(contents.as_bytes()), bytes: contents.len() });
    Ok(path)
}

pub fn write_series(
    dir: &Path,
    name: &str,
    grid: &[f64],
    columns: &[(&str, &Series)],
    manifest: &mut ExperimentManifest,
    force: bool,
) -> Result<PathBuf, SimError> {
    let csv = series_csv(grid, columns)?;
    write_output(dir, name, &csv, manifest, force)
}

/// `<command>.manifest.json` next to the outputs.
pub fn write_manifest(dir: &Path, manifest: &ExperimentManifest, force: bool) -> Result<PathBuf, SimError> {
    let path = dir.join(format!("{}.manifest.json", manifest.command));
    let mut json = serde_json::to_string_pretty(manifest).map_err(|e| SimError::Estimator(e.to_string()))?;
    json.push('\n');
    write_atomic(&path, json.as_bytes(), force)?;
    Ok(path)
}

/// Parses a file produced by [`series_csv`] back into the grid and columns.
pub fn read_series_csv(text: &str) -> Result<(Vec<f64>, Vec<(String, Series)>), SimError> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| SimError::Grid("empty file".into()))?.split(',').collect();
    if header.first() != Some(&"t") || header.len() % 2 == 0 {
        return Err(SimError::Grid("malformed header".into()));
    }
    let mut grid = Vec::new();
    let mut cols: Vec<(String, Series)> = header[1..].chunks(2).map(|c| (c[0].to_string(), Series::default())).collect();
    for line in lines {
        let v: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let v = v.map_err(|e| SimError::Grid(e.to_string()))?;
        if v.len() != header.len() {
            return Err(SimError::Grid("ragged row".into()));
        }
        grid.push(v[0]);
        for (i, (_, s)) in cols.iter_mut().enumerate() {
            s.mean.push(v[1 + 2 * i]);
            s.se.push(v[2 + 2 * i]);
        }
    }
    Ok((grid, cols))
}
