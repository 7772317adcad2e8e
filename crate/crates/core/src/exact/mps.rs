//! MPS export of the time-indexed model and import of external X solutions.
//!
//! Sections follow the fixed MPS layout (NAME, OBJSENSE, ROWS, COLUMNS with
//! integer markers, RHS, BOUNDS, ENDATA). Names may exceed eight characters,
//! so fields are separated by whitespace as free-format readers expect.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use super::tif::{RowSense, TifModel, VarKind};
use crate::model::{Instance, Schedule};

const OBJECTIVE_ROW: &str = "TEC";

/// Renders `model` as an MPS document.
pub fn to_mps_string(model: &TifModel, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("OBJSENSE\n    MIN\n");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    for row in &model.rows {
        let sense = match row.sense {
            RowSense::Eq => 'E',
            RowSense::Le => 'L',
        };
        let _ = writeln!(out, " {sense}  {}", row.name);
    }

    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.variables.len()];
    for (r, row) in model.rows.iter().enumerate() {
        for &(var, coeff) in &row.coeffs {
            entries[var].push((r, coeff));
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_integer_block = false;
    for (k, var) in model.variables.iter().enumerate() {
        let integer = var.kind == VarKind::Binary;
        if integer != in_integer_block {
            let marker = if integer { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    MARKER                 'MARKER'                 {marker}");
            in_integer_block = integer;
        }
        let mut wrote = false;
        if var.objective != 0.0 {
            let _ = writeln!(out, "    {:<10}  {:<10}  {}", var.name, OBJECTIVE_ROW, var.objective);
            wrote = true;
        }
        for &(r, coeff) in &entries[k] {
            if coeff != 0.0 {
                let _ = writeln!(out, "    {:<10}  {:<10}  {}", var.name, model.rows[r].name, coeff);
                wrote = true;
            }
        }
        if !wrote {
            let _ = writeln!(out, "    {:<10}  {:<10}  0", var.name, OBJECTIVE_ROW);
        }
    }
    if in_integer_block {
        out.push_str("    MARKER                 'MARKER'                 'INTEND'\n");
    }

    out.push_str("RHS\n");
    for row in model.rows.iter().filter(|r| r.rhs != 0.0) {
        let _ = writeln!(out, "    RHS         {:<10}  {}", row.name, row.rhs);
    }

    out.push_str("BOUNDS\n");
    for var in &model.variables {
        match var.kind {
            VarKind::Binary if var.lower == var.upper => {
                let _ = writeln!(out, " FX BND         {:<10}  {}", var.name, var.lower);
            }
            VarKind::Binary => {
                let _ = writeln!(out, " BV BND         {}", var.name);
            }
            VarKind::Continuous => {
                if var.lower != 0.0 {
                    let _ = writeln!(out, " LO BND         {:<10}  {}", var.name, var.lower);
                }
                if var.upper.is_finite() {
                    let _ = writeln!(out, " UP BND         {:<10}  {}", var.name, var.upper);
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn export_mps(model: &TifModel, path: &Path) -> std::io::Result<()> {
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("volt_sched");
    fs::write(path, to_mps_string(model, name))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImportError {
    #[error("line {line}: malformed X variable `{name}`")]
    BadName { line: usize, name: String },
    #[error("line {line}: missing or invalid value for `{name}`")]
    BadValue { line: usize, name: String },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// Reads an external solver's solution: one `X_j_i_t value` pair per line.
///
/// Lines without an `X_` token are ignored, so full solution listings with
/// W, U and V values can be passed as they are. Values of 0.5 and above count
/// as selected.
pub fn parse_x_solution(text: &str, instance: &Instance) -> Result<Schedule, ImportError> {
    let mut schedule = Schedule::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(pos) = tokens.iter().position(|t| t.starts_with("X_")) else {
            continue;
        };
        let name = tokens[pos];
        let ids: Vec<usize> = name[2..].split('_').filter_map(|p| p.parse().ok()).collect();
        if ids.len() != 3 || name[2..].split('_').count() != 3 {
            return Err(ImportError::BadName {
                line,
                name: name.to_string(),
            });
        }
        let value: f64 = tokens
            .get(pos + 1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| ImportError::BadValue {
                line,
                name: name.to_string(),
            })?;
        if value < 0.5 {
            continue;
        }
        let (job, machine, start) = (ids[0], ids[1], ids[2]);
        if job >= instance.num_jobs() || machine >= instance.num_machines() {
            return Err(ImportError::Invalid {
                line,
                message: format!("{name} references an unknown job or machine"),
            });
        }
        if start + instance.processing_time(job) > instance.num_slots() {
            return Err(ImportError::Invalid {
                line,
                message: format!("{name} leaves the horizon"),
            });
        }
        if schedule.assign(job, machine, start).is_some() {
            return Err(ImportError::Invalid {
                line,
                message: format!("job {job} is selected more than once"),
            });
        }
    }
    Ok(schedule)
}
