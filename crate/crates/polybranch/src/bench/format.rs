//! The `.pop` instance format.
//!
//! ```text
//! # comment
//! vars 2
//! bounds 0 1 0 1
//! min: 1 x1*x2
//! c1: 1 x1 + 1 x2 >= 1
//! ```
//!
//! Variables are 1-indexed in files, `^p` marks repeated factors, `<=` rows
//! are negated to `>=` on input. Writing is canonical: terms in multiset
//! order, explicit coefficients, shortest float representation; parsing a
//! written file and writing it again reproduces the bytes.

use std::fmt::Write as _;

use thiserror::Error;

use crate::poly::{Monomial, Multiset, POProblem, Polynomial};

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid problem: {0}")]
    Invalid(String),
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

/// Parses one polynomial from whitespace-separated tokens.
fn parse_poly(tokens: &[&str], num_vars: usize, line: usize) -> Result<Polynomial, FormatError> {
    let mut terms: Vec<Monomial> = Vec::new();
    let mut sign = 1.0;
    let mut i = 0;
    while i < tokens.len() {
        match tokens[i] {
            "+" => {
                sign = 1.0;
                i += 1;
                continue;
            }
            "-" => {
                sign = -1.0;
                i += 1;
                continue;
            }
            _ => {}
        }
        let coef: f64 = tokens[i]
            .parse()
            .map_err(|_| err(line, format!("expected a coefficient, found `{}`", tokens[i])))?;
        i += 1;
        let mut indices: Vec<u32> = Vec::new();
        if i < tokens.len() && tokens[i].starts_with('x') {
            for factor in tokens[i].split('*') {
                let body = factor
                    .strip_prefix('x')
                    .ok_or_else(|| err(line, format!("expected a variable, found `{factor}`")))?;
                let (idx_str, power) = match body.split_once('^') {
                    Some((v, p)) => {
                        let p: u32 = p
                            .parse()
                            .map_err(|_| err(line, format!("bad exponent in `{factor}`")))?;
                        (v, p)
                    }
                    None => (body, 1),
                };
                let idx: usize = idx_str
                    .parse()
                    .map_err(|_| err(line, format!("bad variable `{factor}`")))?;
                if idx == 0 || idx > num_vars {
                    return Err(err(
                        line,
                        format!("variable x{idx} out of range (problem has {num_vars} variables)"),
                    ));
                }
                if power == 0 {
                    return Err(err(line, format!("zero exponent in `{factor}`")));
                }
                for _ in 0..power {
                    indices.push((idx - 1) as u32);
                }
            }
            i += 1;
        }
        terms.push(Monomial::new(sign * coef, Multiset::from_indices(&indices)));
        sign = 1.0;
    }
    Ok(Polynomial::new(terms))
}

/// Parses a problem from the line format. The name is left empty; callers
/// typically fill it from the file stem.
pub fn parse_problem(text: &str) -> Result<POProblem, FormatError> {
    let mut num_vars: Option<usize> = None;
    let mut bounds: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut objective: Option<Polynomial> = None;
    let mut ineq: Vec<(Polynomial, f64)> = Vec::new();
    let mut eq: Vec<(Polynomial, f64)> = Vec::new();

    for (line_no, raw) in text.lines().enumerate() {
        let line = line_no + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "vars" => {
                if num_vars.is_some() {
                    return Err(err(line, "duplicate `vars` line"));
                }
                if tokens.len() != 2 {
                    return Err(err(line, "expected `vars N`"));
                }
                let n: usize =
                    tokens[1].parse().map_err(|_| err(line, "bad variable count"))?;
                if n == 0 {
                    return Err(err(line, "problem needs at least one variable"));
                }
                num_vars = Some(n);
            }
            "bounds" => {
                let n = num_vars.ok_or_else(|| err(line, "`bounds` before `vars`"))?;
                if tokens.len() != 1 + 2 * n {
                    return Err(err(line, format!("expected {} bound values", 2 * n)));
                }
                let mut lower = Vec::with_capacity(n);
                let mut upper = Vec::with_capacity(n);
                for j in 0..n {
                    let l: f64 = tokens[1 + 2 * j]
                        .parse()
                        .map_err(|_| err(line, format!("bad lower bound for x{}", j + 1)))?;
                    let u: f64 = tokens[2 + 2 * j]
                        .parse()
                        .map_err(|_| err(line, format!("bad upper bound for x{}", j + 1)))?;
                    lower.push(l);
                    upper.push(u);
                }
                bounds = Some((lower, upper));
            }
            "min:" => {
                let n = num_vars.ok_or_else(|| err(line, "`min:` before `vars`"))?;
                if objective.is_some() {
                    return Err(err(line, "duplicate objective"));
                }
                objective = Some(parse_poly(&tokens[1..], n, line)?);
            }
            label if label.starts_with('c') && label.ends_with(':') => {
                let n = num_vars.ok_or_else(|| err(line, "constraint before `vars`"))?;
                let op_pos = tokens
                    .iter()
                    .position(|t| matches!(*t, ">=" | "<=" | "="))
                    .ok_or_else(|| err(line, "constraint needs `>=`, `<=` or `=`"))?;
                if op_pos + 2 != tokens.len() {
                    return Err(err(line, "expected a single right-hand side after the relation"));
                }
                let poly = parse_poly(&tokens[1..op_pos], n, line)?;
                let rhs: f64 = tokens[op_pos + 1]
                    .parse()
                    .map_err(|_| err(line, "bad right-hand side"))?;
                match tokens[op_pos] {
                    ">=" => ineq.push((poly, rhs)),
                    "<=" => ineq.push((poly.scale(-1.0), -rhs)),
                    "=" => eq.push((poly, rhs)),
                    _ => unreachable!(),
                }
            }
            other => return Err(err(line, format!("unrecognized line `{other}`"))),
        }
    }

    let num_vars = num_vars.ok_or_else(|| err(0, "missing `vars` line"))?;
    let (lower, upper) = bounds.ok_or_else(|| err(0, "missing `bounds` line"))?;
    let objective = objective.ok_or_else(|| err(0, "missing `min:` line"))?;
    let problem = POProblem {
        num_vars,
        objective,
        ineq_constraints: ineq,
        eq_constraints: eq,
        lower,
        upper,
        name: String::new(),
    };
    let report = problem.validate();
    if !report.is_valid() {
        return Err(FormatError::Invalid(report.to_string()));
    }
    Ok(problem)
}

fn write_poly(out: &mut String, poly: &Polynomial) {
    if poly.is_zero() {
        out.push('0');
        return;
    }
    for (i, term) in poly.terms().iter().enumerate() {
        let coef = term.coefficient;
        if i == 0 {
            let _ = write!(out, "{coef}");
        } else if coef < 0.0 {
            let _ = write!(out, " - {}", -coef);
        } else {
            let _ = write!(out, " + {coef}");
        }
        if !term.support.is_empty() {
            out.push(' ');
            for (k, &(v, m)) in term.support.entries().iter().enumerate() {
                if k > 0 {
                    out.push('*');
                }
                let _ = write!(out, "x{}", v + 1);
                if m > 1 {
                    let _ = write!(out, "^{m}");
                }
            }
        }
    }
}

/// Canonical text form; `parse_problem` inverts it bit-exactly.
pub fn write_problem(problem: &POProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {}", problem.num_vars);
    out.push_str("bounds");
    for j in 0..problem.num_vars {
        let _ = write!(out, " {} {}", problem.lower[j], problem.upper[j]);
    }
    out.push('\n');
    out.push_str("min: ");
    write_poly(&mut out, &problem.objective);
    out.push('\n');
    let mut k = 0;
    for (poly, rhs) in &problem.ineq_constraints {
        k += 1;
        let _ = write!(out, "c{k}: ");
        write_poly(&mut out, poly);
        let _ = writeln!(out, " >= {rhs}");
    }
    for (poly, rhs) in &problem.eq_constraints {
        k += 1;
        let _ = write!(out, "c{k}: ");
        write_poly(&mut out, poly);
        let _ = writeln!(out, " = {rhs}");
    }
    out
}
