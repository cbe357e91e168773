//! CSV tables, the run manifest and atomic writing of a result directory.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same `f64`, so identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// Shortest round-trip representation; non-finite values as `nan`/`inf`/`-inf`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        ryu::Buffer::new().format_finite(v).to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file_name: impl Into<String>, header: &[&str]) -> Self {
        Self { file_name: file_name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Io { context: format!("formatting {}", self.file_name), source: e.into() };
        w.write_record(&self.header).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Io { context: format!("formatting {}", self.file_name), source: e.into_error() })
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub scenario: String,
    pub name: String,
    pub config: String,
    pub wall_clock_seconds: f64,
    pub summary: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Renders every table and computes its checksum.
pub fn render_tables(tables: &[Table]) -> Result<Vec<(OutputRecord, Vec<u8>)>, CliError> {
    tables
        .iter()
        .map(|t| {
            let bytes = t.to_csv()?;
            let record = OutputRecord {
                file: t.file_name.clone(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len(),
                rows: t.rows.len(),
            };
            Ok((record, bytes))
        })
        .collect()
}

/// Writes `files` and `manifest.json` into `dir`.
///
/// Everything goes to a sibling staging directory first and is moved into
/// place only once all files are written, so a failed run leaves no partial
/// output behind.
pub fn write_atomically(dir: &Path, files: &[(String, Vec<u8>)], manifest: &RunManifest) -> Result<(), CliError> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(CliError::io(format!("creating {}", parent.display())))?;
    let leaf = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let staging = parent.join(format!(".{leaf}.staging-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(CliError::io(format!("clearing {}", staging.display())))?;
    }
    let result = (|| {
        fs::create_dir_all(&staging).map_err(CliError::io(format!("creating {}", staging.display())))?;
        for (name, bytes) in files {
            let path = staging.join(name);
            fs::write(&path, bytes).map_err(CliError::io(format!("writing {}", path.display())))?;
        }
        let json = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
        fs::write(staging.join("manifest.json"), json).map_err(CliError::io("writing manifest.json"))?;

        if dir.exists() {
            for entry in fs::read_dir(&staging).map_err(CliError::io("listing staged files"))? {
                let entry = entry.map_err(CliError::io("listing staged files"))?;
                let target = dir.join(entry.file_name());
                fs::rename(entry.path(), &target).map_err(CliError::io(format!("moving {}", target.display())))?;
            }
            fs::remove_dir(&staging).map_err(CliError::io("removing staging directory"))?;
        } else {
            fs::rename(&staging, dir).map_err(CliError::io(format!("moving results to {}", dir.display())))?;
        }
        Ok(())
    })();
    if result.is_err() && staging.exists() {
        let _ = fs::remove_dir_all(&staging);
    }
    result
}
