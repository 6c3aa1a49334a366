//! CSV and metadata writers. Numbers use 17 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::CellField;
use crate::stepper::HistoryEntry;

use super::convergence::ConvergenceReport;
use super::truncation::TruncationReport;

/// Round-trip safe scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub const HISTORY_COLUMNS: [&str; 7] = [
    "step",
    "time",
    "energy",
    "min_rho",
    "mass_drift_pointwise",
    "mass_drift_species",
    "dual_increment_sq",
];

pub fn write_history(path: &Path, history: &[HistoryEntry]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(HISTORY_COLUMNS)?;
    for e in history {
        w.write_record([
            e.step.to_string(),
            fmt_num(e.time),
            fmt_num(e.energy),
            fmt_num(e.min_density),
            fmt_num(e.mass_drift_pointwise),
            fmt_num(e.mass_drift_species),
            fmt_num(e.dual_increment_sq),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_convergence(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["param", "err_linf", "err_l2"])?;
    for k in 0..report.params.len() {
        w.write_record([
            fmt_num(report.params[k]),
            fmt_num(report.err_linf[k]),
            fmt_num(report.err_l2[k]),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_truncation(path: &Path, report: &TruncationReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["h", "dt", "tau1", "tau2", "tau3"])?;
    for r in &report.rows {
        w.write_record([fmt_num(r.h), fmt_num(r.dt), fmt_num(r.tau1), fmt_num(r.tau2), fmt_num(r.tau3)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Cell coordinates followed by one column per species.
pub fn write_snapshot(path: &Path, rho: &CellField) -> Result<()> {
    let mut w = writer(path)?;
    let grid = rho.grid();
    let mut header: Vec<String> = vec!["x".into()];
    if grid.dim() == 2 {
        header.push("y".into());
    }
    header.extend((1..=rho.species()).map(|i| format!("rho{i}")));
    w.write_record(&header)?;
    for c in 0..grid.cell_count() {
        let x = grid.cell_center(c);
        let mut row: Vec<String> = (0..grid.dim()).map(|s| fmt_num(x[s])).collect();
        row.extend((0..rho.species()).map(|i| fmt_num(rho.get(i, c))));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `key = value` lines.
pub fn write_metadata(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    for (k, v) in entries {
        writeln!(file, "{k} = {v}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
