//! CSV and JSON writers.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::simulation::StepRecord;
use crate::error::{Error, Result};

const COORDS: [&str; 4] = ["k1", "p1", "k2", "p2"];

/// Fixed CSV header: `t`, `Ω`, `Ω̇`, `e_p`, `s`, `τ_c`, `r` (four columns each),
/// `v3_dot_bound`, six cable lengths and the six-component task error.
pub fn csv_header() -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for prefix in ["omega", "omega_dot", "e", "s", "tau_c", "r"] {
        h.extend(COORDS.iter().map(|c| format!("{prefix}_{c}")));
    }
    h.push("v3_dot_bound".into());
    for seg in 1..=2 {
        h.extend((1..=3).map(|c| format!("cable_{seg}_{c}")));
    }
    h.extend(["task_err_x", "task_err_y", "task_err_z", "task_err_rx", "task_err_ry", "task_err_rz"].map(String::from));
    h
}

fn record_row(r: &StepRecord) -> Vec<f64> {
    let mut row = Vec::with_capacity(38);
    row.push(r.time);
    for v in [&r.omega, &r.omega_dot, &r.position_error, &r.sliding, &r.control, &r.residual] {
        row.extend(v.iter());
    }
    row.push(r.v3_dot_bound);
    row.extend(r.cables);
    row.extend(r.task_error.iter());
    row
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

pub fn write_csv_to<W: Write>(writer: W, records: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let fail = |e: csv::Error| Error::Config(format!("CSV output: {e}"));
    w.write_record(csv_header()).map_err(fail)?;
    for r in records {
        w.write_record(record_row(r).iter().map(|v| v.to_string())).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Config(format!("CSV output: {e}")))
}

pub fn write_csv(path: &Path, records: &[StepRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
    write_csv_to(std::io::BufWriter::new(file), records)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}
