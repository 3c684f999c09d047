//! CSV and JSON persistence.

use std::path::Path;

use nehari_core::curve::Curve;
use serde::Serialize;

use crate::CliError;

/// Seventeen significant digits: every `f64` survives a write/read cycle.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{}: {e}", path.display()))
}

/// State file with header `<coord>,u`.
pub fn write_state_csv(
    path: &Path,
    coord: &str,
    nodes: &[f64],
    values: &[f64],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record([coord, "u"])
        .map_err(|e| io_error(path, e))?;
    for (x, u) in nodes.iter().zip(values) {
        w.write_record([format_float(*x), format_float(*u)])
            .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// A state file: coordinate column name, node coordinates and values.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub coord: String,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn read_state_csv(path: &Path) -> Result<StateFile, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header = r.headers().map_err(|e| io_error(path, e))?.clone();
    if header.len() != 2 || !matches!(&header[0], "r" | "x") || &header[1] != "u" {
        return Err(CliError::config(format!(
            "{}: expected header 'r,u' or 'x,u', got '{}'",
            path.display(),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| io_error(path, e))?;
        let parse = |k: usize| -> Result<f64, CliError> {
            record
                .get(k)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::config(format!(
                        "{}: row {} has a malformed number",
                        path.display(),
                        line + 2
                    ))
                })
        };
        nodes.push(parse(0)?);
        values.push(parse(1)?);
    }
    Ok(StateFile {
        coord: header[0].to_string(),
        nodes,
        values,
    })
}

/// Curve file with header `c,lambda,grad_norm,fiber_t`; failed points are
/// written with `NaN` entries.
pub fn write_curve_csv(path: &Path, curve: &Curve) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(["c", "lambda", "grad_norm", "fiber_t"])
        .map_err(|e| io_error(path, e))?;
    for p in &curve.points {
        w.write_record([
            format_float(p.c),
            format_float(p.lambda),
            format_float(p.grad_norm),
            format_float(p.fiber_t),
        ])
        .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, to_json(value)).map_err(|e| io_error(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}
