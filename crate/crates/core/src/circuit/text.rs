//! Line-oriented circuit format.
//!
//! ```text
//! # comment
//! GF z 0.5 1.25
//! EX 0 1 3.1415926535897931e0
//! XY 0 1 0.25
//! ```

use std::fmt::Write;

use super::{Circuit, OpKind, PulseOp};
use crate::error::{Error, Result};
use crate::register::{Axis, RegisterSpec};

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    for op in &c.ops {
        match &op.kind {
            OpKind::Exchange { i, j, xi } => writeln!(out, "EX {i} {j} {}", fmt_f64(*xi)),
            OpKind::XYExchange { i, j, phi } => writeln!(out, "XY {i} {j} {}", fmt_f64(*phi)),
            OpKind::GlobalField { axis, angles } => {
                let a: Vec<String> = angles.iter().map(|a| fmt_f64(*a)).collect();
                writeln!(out, "GF {axis} {}", a.join(" "))
            }
        }
        .expect("write to string");
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("bad {what} '{tok}'")))
}

/// Parses a circuit. Without `n_spins` the register size is the field
/// pulses' list length, or one more than the largest index.
pub fn parse_circuit(src: &str, n_spins: Option<usize>) -> Result<Circuit> {
    let mut ops = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let tag = toks.next().expect("nonempty");
        let op = match tag {
            "EX" | "XY" => {
                let i: usize = num(line, toks.next(), "index")?;
                let j: usize = num(line, toks.next(), "index")?;
                let a: f64 = num(line, toks.next(), "angle")?;
                if !a.is_finite() {
                    return Err(perr(line, "non-finite angle"));
                }
                if tag == "EX" {
                    PulseOp::exchange(i, j, a)
                } else {
                    PulseOp::xy(i, j, a)
                }
            }
            "GF" => {
                let axis: Axis = toks
                    .next()
                    .ok_or_else(|| perr(line, "missing axis"))?
                    .parse()
                    .map_err(|e: String| perr(line, e))?;
                let mut angles = Vec::new();
                for t in toks.by_ref() {
                    let a: f64 = num(line, Some(t), "angle")?;
                    if !a.is_finite() {
                        return Err(perr(line, "non-finite angle"));
                    }
                    angles.push(a);
                }
                if angles.is_empty() {
                    return Err(perr(line, "field pulse without angles"));
                }
                PulseOp::field(axis, angles)
            }
            other => return Err(perr(line, format!("unknown op '{other}'"))),
        };
        if toks.next().is_some() {
            return Err(perr(line, "trailing tokens"));
        }
        ops.push((line, op));
    }
    let n = match n_spins {
        Some(n) => n,
        None => infer_size(&ops)?,
    };
    let reg = RegisterSpec::new(n)?;
    for (line, op) in &ops {
        op.validate(&reg).map_err(|e| perr(*line, e.to_string()))?;
    }
    Ok(Circuit {
        register: reg,
        ops: ops.into_iter().map(|(_, op)| op).collect(),
    })
}

fn infer_size(ops: &[(usize, PulseOp)]) -> Result<usize> {
    let mut gf = None;
    let mut max_index = 0;
    for (line, op) in ops {
        match &op.kind {
            OpKind::GlobalField { angles, .. } => match gf {
                None => gf = Some(angles.len()),
                Some(n) if n != angles.len() => {
                    return Err(perr(
                        *line,
                        format!("field pulse has {} angles, expected {n}", angles.len()),
                    ))
                }
                _ => {}
            },
            OpKind::Exchange { i, j, .. } | OpKind::XYExchange { i, j, .. } => {
                max_index = max_index.max(*i).max(*j);
            }
        }
    }
    Ok(gf.unwrap_or(max_index + 1).max(1))
}
