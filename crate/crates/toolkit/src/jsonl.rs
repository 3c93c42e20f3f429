//! One JSON object per line. Blank lines are skipped on read.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use vdp_core::dataset::{check_unique_paths, ManifestEntry};
use vdp_core::metrics::{RatingRecord, RatingTable};

use crate::{Error, Result};

pub fn parse_jsonl<T: DeserializeOwned>(reader: impl BufRead, path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| Error::Parse { path: path.into(), line: i + 1, message: e.to_string() })?;
        out.push(row);
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(Error::io(path))?;
    parse_jsonl(BufReader::new(file), path)
}

pub fn to_jsonl<T: Serialize>(rows: &[T]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("rows serialize to JSON"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(File::create(path).map_err(Error::io(path))?);
    w.write_all(to_jsonl(rows).as_bytes()).map_err(Error::io(path))?;
    w.flush().map_err(Error::io(path))
}

/// Reads a manifest and rejects repeated image paths.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let rows: Vec<ManifestEntry> = read_jsonl(path)?;
    check_unique_paths(&rows).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })?;
    Ok(rows)
}

pub fn write_manifest(path: impl AsRef<Path>, rows: &[ManifestEntry]) -> Result<()> {
    write_jsonl(path, rows)
}

pub fn read_ratings(path: impl AsRef<Path>) -> Result<RatingTable> {
    let path = path.as_ref();
    let records: Vec<RatingRecord> = read_jsonl(path)?;
    RatingTable::from_records(records).map_err(|e| Error::Format { path: path.into(), message: e.to_string() })
}

pub fn ratings_jsonl(table: &RatingTable) -> String {
    to_jsonl(&table.records())
}

pub fn write_ratings(path: impl AsRef<Path>, table: &RatingTable) -> Result<()> {
    write_jsonl(path, &table.records())
}
