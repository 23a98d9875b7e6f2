//! Report persistence: comma-separated rows with a fixed header, plus the
//! `approach,tau,rho` triples that carry profile curves.

use std::fmt::Write as _;

use thiserror::Error;

use crate::bench::metrics::RunRow;
use crate::bench::profile::ProfileCurve;

pub const REPORT_HEADER: &str = "instance,approach,solved,gap,time_s,pace,nodes";

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unknown column `{0}` in report header")]
    UnknownColumn(String),
    #[error("missing column `{0}` in report header")]
    MissingColumn(String),
    #[error("field `{field}` contains a reserved character: {value:?}")]
    ReservedCharacter { field: &'static str, value: String },
}

fn check_field(field: &'static str, value: &str) -> Result<(), ReportError> {
    if value.contains(',') || value.contains('\n') {
        return Err(ReportError::ReservedCharacter { field, value: value.to_string() });
    }
    Ok(())
}

/// Serializes rows losslessly; missing gaps become empty fields.
pub fn write_report(rows: &[RunRow]) -> Result<String, ReportError> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for row in rows {
        check_field("instance", &row.instance)?;
        check_field("approach", &row.approach)?;
        let gap = row.gap.map(|g| g.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.instance, row.approach, row.solved, gap, row.time_s, row.pace, row.nodes
        );
    }
    Ok(out)
}

/// Reads a report back; the header must match [`REPORT_HEADER`] exactly.
pub fn read_report(text: &str) -> Result<Vec<RunRow>, ReportError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| ReportError::Malformed { line: 1, message: "empty report".into() })?;
    let expected: Vec<&str> = REPORT_HEADER.split(',').collect();
    let got: Vec<&str> = header.split(',').collect();
    for column in &got {
        if !expected.contains(column) {
            return Err(ReportError::UnknownColumn(column.to_string()));
        }
    }
    for column in &expected {
        if !got.contains(column) {
            return Err(ReportError::MissingColumn(column.to_string()));
        }
    }
    if got != expected {
        return Err(ReportError::Malformed {
            line: 1,
            message: "report columns out of order".into(),
        });
    }

    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected.len() {
            return Err(ReportError::Malformed {
                line: line_no,
                message: format!("expected {} fields, found {}", expected.len(), fields.len()),
            });
        }
        let parse_f64 = |name: &str, s: &str| -> Result<f64, ReportError> {
            s.parse().map_err(|_| ReportError::Malformed {
                line: line_no,
                message: format!("bad {name} value `{s}`"),
            })
        };
        let solved = match fields[2] {
            "true" => true,
            "false" => false,
            other => {
                return Err(ReportError::Malformed {
                    line: line_no,
                    message: format!("bad solved flag `{other}`"),
                })
            }
        };
        let gap = if fields[3].is_empty() { None } else { Some(parse_f64("gap", fields[3])?) };
        rows.push(RunRow {
            instance: fields[0].to_string(),
            approach: fields[1].to_string(),
            solved,
            gap,
            time_s: parse_f64("time_s", fields[4])?,
            pace: parse_f64("pace", fields[5])?,
            nodes: fields[6].parse().map_err(|_| ReportError::Malformed {
                line: line_no,
                message: format!("bad nodes value `{}`", fields[6]),
            })?,
            trace_ref: None,
        });
    }
    Ok(rows)
}

/// Profile curves as `approach,tau,rho` triples under a header line.
pub fn write_profile(curves: &[ProfileCurve]) -> String {
    let mut out = String::from("approach,tau,rho\n");
    for curve in curves {
        for &(tau, rho) in &curve.points {
            let _ = writeln!(out, "{},{},{}", curve.approach, tau, rho);
        }
    }
    out
}
