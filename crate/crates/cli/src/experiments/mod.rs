pub mod geometry;
pub mod paths;
pub mod semirel;

use serde::Serialize;
use serde_json::Value;

use dispersia::{Error, Result};

/// One `(parameter, value)` sample of a named series, for plotting.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub series: String,
    pub parameter: f64,
    pub value: f64,
}

impl Row {
    pub fn new(series: &str, parameter: f64, value: f64) -> Self {
        Self { series: series.to_string(), parameter, value }
    }
}

pub struct Outcome {
    /// Property check of the experiment; decides exit code 0 or 2.
    pub passed: bool,
    pub result: Value,
    pub rows: Vec<Row>,
}

impl Outcome {
    pub fn new<S: Serialize>(passed: bool, result: &S, rows: Vec<Row>) -> Result<Self> {
        let result = serde_json::to_value(result).map_err(|e| Error::Validation(format!("serializing result: {e}")))?;
        Ok(Self { passed, result, rows })
    }
}

pub(crate) fn series(name: &str, x: &[f64], y: &[f64]) -> Vec<Row> {
    x.iter().zip(y).map(|(a, b)| Row::new(name, *a, *b)).collect()
}
