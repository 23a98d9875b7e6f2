//! Line-delimited solve traces: the lower-bound trajectory and one record per
//! branched node.
//!
//! ```text
//! lb,<measure>,<bound>
//! node,<id>,<parent|->,<rule>,<variable>,<parent_lb>,<left_lb>,<right_lb>,<kpi>,<wall>
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::SolveResult;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceNode {
    pub id: u64,
    pub parent: Option<u64>,
    pub rule: String,
    pub variable: u32,
    pub parent_lb: f64,
    pub left_lb: f64,
    pub right_lb: f64,
    pub kpi: f64,
    pub wall: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceData {
    pub lb_trace: Vec<(f64, f64)>,
    pub nodes: Vec<TraceNode>,
}

pub fn write_trace(result: &SolveResult) -> String {
    let mut out = String::new();
    for &(t, lb) in &result.lb_trace {
        let _ = writeln!(out, "lb,{t},{lb}");
    }
    for d in &result.node_log {
        let _ = writeln!(
            out,
            "node,{},{},{},{},{},{},{},{},{}",
            d.node_id,
            d.parent_id.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            d.label,
            d.variable,
            d.parent_lb,
            d.child_lbs.0,
            d.child_lbs.1,
            d.kpi_observed,
            d.wall,
        );
    }
    out
}

pub fn read_trace(text: &str) -> Result<TraceData, TraceError> {
    let mut data = TraceData::default();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let bad = |message: String| TraceError::Malformed { line: line_no, message };
        let parse_f64 = |s: &str| -> Result<f64, TraceError> {
            s.parse().map_err(|_| bad(format!("bad number `{s}`")))
        };
        match fields[0] {
            "lb" => {
                if fields.len() != 3 {
                    return Err(bad("lb records have 3 fields".into()));
                }
                data.lb_trace.push((parse_f64(fields[1])?, parse_f64(fields[2])?));
            }
            "node" => {
                if fields.len() != 10 {
                    return Err(bad("node records have 10 fields".into()));
                }
                data.nodes.push(TraceNode {
                    id: fields[1].parse().map_err(|_| bad("bad node id".into()))?,
                    parent: match fields[2] {
                        "-" => None,
                        other => {
                            Some(other.parse().map_err(|_| bad("bad parent id".into()))?)
                        }
                    },
                    rule: fields[3].to_string(),
                    variable: fields[4].parse().map_err(|_| bad("bad variable".into()))?,
                    parent_lb: parse_f64(fields[5])?,
                    left_lb: parse_f64(fields[6])?,
                    right_lb: parse_f64(fields[7])?,
                    kpi: parse_f64(fields[8])?,
                    wall: parse_f64(fields[9])?,
                });
            }
            other => return Err(bad(format!("unknown record type `{other}`"))),
        }
    }
    Ok(data)
}
