//! CSV serialization of step traces.
//!
//! Fixed schema: iter, epoch, f_before, f_after, phi, delta_f, ratio,
//! eta_before, eta_after, step_norm, flags (semicolon-joined), R. Floats are
//! written with 17 significant digits so parsing recovers them bit-exactly.

use std::io::Write;
use std::path::Path;

use polyadapt::types::{StepFlags, StepRecord};

use crate::config::ConfigError;

pub const HEADER: &str =
    "iter,epoch,f_before,f_after,phi,delta_f,ratio,eta_before,eta_after,step_norm,flags,R";

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_trace(records: &[StepRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 120);
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.iter,
            r.epoch,
            fmt_f64(r.f_before),
            fmt_f64(r.f_after),
            fmt_f64(r.phi),
            fmt_f64(r.delta_f),
            fmt_f64(r.ratio),
            fmt_f64(r.eta_before),
            fmt_f64(r.eta_after),
            fmt_f64(r.step_norm),
            r.flags.encode(),
            fmt_f64(r.r),
        ));
    }
    out
}

pub fn write_trace(path: &Path, records: &[StepRecord]) -> Result<(), ConfigError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| ConfigError(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    file.write_all(format_trace(records).as_bytes())
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(
    cell: &str,
    name: &str,
    line: usize,
) -> Result<T, ConfigError> {
    cell.parse()
        .map_err(|_| ConfigError(format!("trace line {line}: bad {name} '{cell}'")))
}

pub fn parse_trace(text: &str) -> Result<Vec<StepRecord>, ConfigError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        Some((_, h)) => return Err(ConfigError(format!("unexpected trace header '{h}'"))),
        None => return Err(ConfigError("empty trace file".into())),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 12 {
            return Err(ConfigError(format!(
                "trace line {line_no}: expected 12 columns, found {}",
                cells.len()
            )));
        }
        records.push(StepRecord {
            iter: parse_field(cells[0], "iter", line_no)?,
            epoch: parse_field(cells[1], "epoch", line_no)?,
            f_before: parse_field(cells[2], "f_before", line_no)?,
            f_after: parse_field(cells[3], "f_after", line_no)?,
            phi: parse_field(cells[4], "phi", line_no)?,
            delta_f: parse_field(cells[5], "delta_f", line_no)?,
            ratio: parse_field(cells[6], "ratio", line_no)?,
            eta_before: parse_field(cells[7], "eta_before", line_no)?,
            eta_after: parse_field(cells[8], "eta_after", line_no)?,
            step_norm: parse_field(cells[9], "step_norm", line_no)?,
            flags: StepFlags::decode(cells[10])
                .map_err(|e| ConfigError(format!("trace line {line_no}: {e}")))?,
            r: parse_field(cells[11], "R", line_no)?,
        });
    }
    Ok(records)
}

pub fn read_trace(path: &Path) -> Result<Vec<StepRecord>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_trace(&text)
}
