//! Trace serialization. Numbers are written in their shortest round-trip
//! form (at most 17 significant digits), so output is reproducible byte for
//! byte and loses no precision.

use std::fs;
use std::io::Write;
use std::path::Path;

use heisenberg_core::GeodesicState;
use serde::Serialize;

use crate::error::CliError;

/// One trace sample with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: f64,
    pub vx: Vec<f64>,
    pub vy: Vec<f64>,
    pub vz: f64,
    pub theta: f64,
    pub energy: f64,
    pub alpha_residual: f64,
}

impl TraceRow {
    pub fn new(s: &GeodesicState, theta: f64, energy: f64, alpha_residual: f64) -> Self {
        Self {
            t: s.t,
            x: s.point.x().to_vec(),
            y: s.point.y().to_vec(),
            z: s.point.z(),
            vx: s.velocity.ux().to_vec(),
            vy: s.velocity.uy().to_vec(),
            vz: s.velocity.uz(),
            theta,
            energy,
            alpha_residual,
        }
    }
}

pub fn csv_header(p: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for prefix in ["x", "y"] {
        cols.extend((1..=p).map(|i| format!("{prefix}_{i}")));
    }
    cols.push("z".into());
    for prefix in ["vx", "vy"] {
        cols.extend((1..=p).map(|i| format!("{prefix}_{i}")));
    }
    cols.extend(["vz", "theta", "energy", "alpha_residual"].map(String::from));
    cols.join(",")
}

pub fn number(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else {
        v.to_string()
    }
}

pub fn trace_csv(p: usize, rows: &[TraceRow]) -> String {
    let mut out = csv_header(p);
    out.push('\n');
    for r in rows {
        let mut fields = vec![r.t];
        fields.extend(&r.x);
        fields.extend(&r.y);
        fields.push(r.z);
        fields.extend(&r.vx);
        fields.extend(&r.vy);
        fields.extend([r.vz, r.theta, r.energy, r.alpha_residual]);
        let line: Vec<String> = fields.into_iter().map(number).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes to `path`, or stdout when `None`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, content).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(CliError::Stdout)
        }
    }
}
