//! Path and report serialization.
//!
//! Paths travel as CSV with a `t,x[,y[,z]]` header and 17 significant digits
//! per field, which round-trips every finite `f64` exactly, or as a JSON
//! mirror `{"grid": [...], "values": [[...], ...]}`.  Reports are plain
//! serde-serialized JSON with struct-declared key order, so reruns with the
//! same inputs produce byte-identical files.

use crate::error::{domain, Error, Result};
use crate::path::{PathValue, PlanarPath, SampledPath};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::path::HeisPath;

const HEADERS: [&str; 3] = ["t,x", "t,x,y", "t,x,y,z"];

pub(crate) fn fmt_field(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a path as CSV.
pub fn write_path_csv<V: PathValue>(dest: &Path, path: &SampledPath<V>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(dest)?);
    writeln!(out, "{}", HEADERS[V::WIDTH - 1])?;
    let mut row = [0.0f64; 3];
    for (t, v) in path.grid().iter().zip(path.values()) {
        v.to_row(&mut row);
        let mut line = fmt_field(*t);
        for c in &row[..V::WIDTH] {
            line.push(',');
            line.push_str(&fmt_field(*c));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn parse_field(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("{e}: {s:?}") })
}

fn read_rows(src: &Path, width: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let file = BufReader::new(std::fs::File::open(src)?);
    let mut grid = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if i == 0 {
            if trimmed != HEADERS[width - 1] {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("expected header {:?}, got {trimmed:?}", HEADERS[width - 1]),
                });
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != width + 1 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected {} fields, got {}", width + 1, fields.len()),
            });
        }
        grid.push(parse_field(fields[0], i + 1)?);
        let mut row = Vec::with_capacity(width);
        for f in &fields[1..] {
            row.push(parse_field(f, i + 1)?);
        }
        rows.push(row);
    }
    Ok((grid, rows))
}

/// Read a CSV path whose value width matches `V`.
pub fn read_path_csv<V: PathValue>(src: &Path) -> Result<SampledPath<V>> {
    let (grid, rows) = read_rows(src, V::WIDTH)?;
    let values = rows.iter().map(|r| V::from_row(r)).collect();
    SampledPath::new(grid, values)
}

/// A planar or space path read from CSV, distinguished by the header.
pub enum AnyPath {
    Planar(PlanarPath),
    Heis(HeisPath),
}

pub fn read_path_csv_auto(src: &Path) -> Result<AnyPath> {
    let file = BufReader::new(std::fs::File::open(src)?);
    let header = file
        .lines()
        .next()
        .transpose()?
        .ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    match header.trim() {
        "t,x,y" => Ok(AnyPath::Planar(read_path_csv(src)?)),
        "t,x,y,z" => Ok(AnyPath::Heis(read_path_csv(src)?)),
        other => Err(Error::Parse { line: 1, msg: format!("unrecognized header {other:?}") }),
    }
}

#[derive(Serialize, Deserialize)]
struct PathJson {
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// JSON mirror of the CSV path layout.
pub fn write_path_json<V: PathValue>(dest: &Path, path: &SampledPath<V>) -> Result<()> {
    let mut row = [0.0f64; 3];
    let values = path
        .values()
        .iter()
        .map(|v| {
            v.to_row(&mut row);
            row[..V::WIDTH].to_vec()
        })
        .collect();
    let doc = PathJson { grid: path.grid().to_vec(), values };
    write_json(dest, &doc)
}

pub fn read_path_json<V: PathValue>(src: &Path) -> Result<SampledPath<V>> {
    let doc: PathJson = read_json(src)?;
    for (i, row) in doc.values.iter().enumerate() {
        if row.len() != V::WIDTH {
            return Err(domain(format!(
                "value row {i} has {} entries, expected {}",
                row.len(),
                V::WIDTH
            )));
        }
    }
    let values = doc.values.iter().map(|r| V::from_row(r)).collect();
    SampledPath::new(doc.grid, values)
}

/// Pretty-printed JSON for any serializable report.
pub fn write_json<T: Serialize>(dest: &Path, value: &T) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(dest)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(src: &Path) -> Result<T> {
    let file = BufReader::new(std::fs::File::open(src)?);
    Ok(serde_json::from_reader(file)?)
}
