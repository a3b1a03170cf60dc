//! File formats. JSON everywhere; densities may also be CSV with header
//! `x,y,z,w`.

use std::path::Path;

use serde::de::DeserializeOwned;

use crate::density::ChargeDensity;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses JSON, reporting line and column on failure.
pub fn parse_json<V: DeserializeOwned>(text: &str, source_name: &str) -> Result<V> {
    serde_json::from_str(text).map_err(|e| {
        let message = if e.line() == 0 {
            e.to_string()
        } else {
            format!("line {} column {}: {}", e.line(), e.column(), e)
        };
        Error::parse(source_name, message)
    })
}

pub fn read_json<V: DeserializeOwned>(path: &Path) -> Result<V> {
    parse_json(&read_text(path)?, &path.display().to_string())
}

pub fn parse_density_csv<T: Real>(text: &str, source_name: &str) -> Result<ChargeDensity<T>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(source_name, e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    if names != ["x", "y", "z", "w"] {
        return Err(Error::parse(
            source_name,
            format!("expected header x,y,z,w, found {}", names.join(",")),
        ));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::parse(source_name, format!("line {line}: {e}")))?;
        if record.len() != 4 {
            return Err(Error::parse(
                source_name,
                format!("line {line}: expected 4 fields, found {}", record.len()),
            ));
        }
        let mut v = [0.0f64; 4];
        for (k, field) in record.iter().enumerate() {
            v[k] = field.parse().map_err(|_| {
                Error::parse(
                    source_name,
                    format!("line {line} field {}: cannot parse {field:?}", names[k]),
                )
            })?;
        }
        points.push([T::lit(v[0]), T::lit(v[1]), T::lit(v[2])]);
        weights.push(T::lit(v[3]));
    }
    let label = Path::new(source_name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    ChargeDensity::new(points, weights, label).map_err(|e| Error::parse(source_name, e.to_string()))
}

/// Reads a density, choosing CSV for a `.csv` extension and JSON otherwise.
pub fn read_density<T: Real>(path: &Path) -> Result<ChargeDensity<T>> {
    let text = read_text(path)?;
    let name = path.display().to_string();
    let is_csv = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("csv"))
        .unwrap_or(false);
    if is_csv {
        parse_density_csv(&text, &name)
    } else {
        parse_json(&text, &name)
    }
}
