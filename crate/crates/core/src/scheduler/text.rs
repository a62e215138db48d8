//! Schedule files.
//!
//! ```text
//! spins 2
//! geometry paper_device
//! convention estimate_full
//! row 0
//! F 0.000000 63.812345 parallel + 0.700000
//! E 63.812345 10.000000 (0,1,3.1415926535897931e0)
//! ```
//!
//! Times are nanoseconds, currents milliamperes.

use super::{Event, Payload, Schedule};
use crate::circuit::text::fmt_f64;
use crate::device::{CurrentConfig, DeviceGeometry};
use crate::error::{Error, Result};
use crate::register::{Convention, RegisterSpec};

pub fn serialize_schedule(s: &Schedule) -> String {
    let mut out = String::new();
    out.push_str(&format!("spins {}\n", s.register.n_spins()));
    out.push_str(&format!("geometry {}\n", s.geometry.name));
    out.push_str(&format!("convention {}\n", s.convention.name()));
    out.push_str(&format!("row {}\n", s.active_row));
    for e in &s.events {
        let (t, d) = (e.t_start * 1e9, e.duration * 1e9);
        match &e.payload {
            Payload::Field { config, current, sign } => {
                let sign = if *sign < 0.0 { '-' } else { '+' };
                out.push_str(&format!("F {t:.6} {d:.6} {config} {sign} {:.6}\n", current * 1e3));
            }
            Payload::Exchange { pairs } => {
                let body: Vec<String> = pairs
                    .iter()
                    .map(|(i, j, xi)| format!("({i},{j},{})", fmt_f64(*xi)))
                    .collect();
                out.push_str(&format!("E {t:.6} {d:.6} {}\n", body.join(",")));
            }
        }
    }
    out
}

fn num(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad {what} '{tok}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite {what}"),
        });
    }
    Ok(v)
}

fn pairs(src: &str, line: usize) -> Result<Vec<(usize, usize, f64)>> {
    let bad = |msg: String| Error::Parse { line, msg };
    let mut out = Vec::new();
    let mut rest = src.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| bad(format!("expected '(' at '{rest}'")))?;
        let close = body.find(')').ok_or_else(|| bad("unclosed '('".into()))?;
        let parts: Vec<&str> = body[..close].split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad(format!("pair needs (i,j,xi), got '({})'", &body[..close])));
        }
        let i = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad spin index '{}'", parts[0])))?;
        let j = parts[1]
            .parse()
            .map_err(|_| bad(format!("bad spin index '{}'", parts[1])))?;
        out.push((i, j, num(Some(parts[2]), line, "xi")?));
        rest = body[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err(bad("trailing ','".into()));
            }
        } else if !rest.is_empty() {
            return Err(bad(format!("unexpected '{rest}'")));
        }
    }
    if out.is_empty() {
        return Err(bad("exchange event without pairs".into()));
    }
    Ok(out)
}

/// Parses a schedule; `resolve` maps the geometry name in the header to a
/// geometry.
pub fn parse_schedule(src: &str, resolve: impl Fn(&str) -> Result<DeviceGeometry>) -> Result<Schedule> {
    let mut spins = None;
    let mut geometry = None;
    let mut convention = None;
    let mut row = 0usize;
    let mut events = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let (head, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        let rest = rest.trim();
        let bad = |msg: String| Error::Parse { line, msg };
        match head {
            "spins" => {
                let n: usize = rest.parse().map_err(|_| bad(format!("bad spin count '{rest}'")))?;
                spins = Some(RegisterSpec::new(n).map_err(|e| bad(e.to_string()))?);
            }
            "geometry" => geometry = Some(resolve(rest).map_err(|e| bad(e.to_string()))?),
            "convention" => convention = Some(rest.parse::<Convention>().map_err(bad)?),
            "row" => row = rest.parse().map_err(|_| bad(format!("bad row '{rest}'")))?,
            "F" | "E" => {
                let mut toks = rest.split_whitespace();
                let t_start = num(toks.next(), line, "start time")? * 1e-9;
                let duration = num(toks.next(), line, "duration")? * 1e-9;
                let payload = if head == "F" {
                    let config: CurrentConfig = toks
                        .next()
                        .ok_or_else(|| bad("missing config".into()))?
                        .parse()
                        .map_err(bad)?;
                    if config == CurrentConfig::Custom {
                        return Err(bad("field events use parallel or antiparallel".into()));
                    }
                    let sign = match toks.next() {
                        Some("+") => 1.0,
                        Some("-") => -1.0,
                        other => return Err(bad(format!("bad sign {other:?}"))),
                    };
                    let current = num(toks.next(), line, "current")? * 1e-3;
                    if let Some(extra) = toks.next() {
                        return Err(bad(format!("unexpected '{extra}'")));
                    }
                    Payload::Field { config, current, sign }
                } else {
                    let body = rest.split_whitespace().skip(2).collect::<Vec<_>>().join("");
                    Payload::Exchange {
                        pairs: pairs(&body, line)?,
                    }
                };
                events.push(Event {
                    t_start,
                    duration,
                    payload,
                });
            }
            other => return Err(bad(format!("unknown directive '{other}'"))),
        }
    }
    let missing = |what: &str| Error::Parse {
        line: 0,
        msg: format!("missing '{what}' header"),
    };
    let register = spins.ok_or_else(|| missing("spins"))?;
    let geometry = geometry.ok_or_else(|| missing("geometry"))?;
    let convention = convention.ok_or_else(|| missing("convention"))?;
    for e in &events {
        if let Payload::Exchange { pairs } = &e.payload {
            for &(i, j, _) in pairs {
                register.check_pair(i, j)?;
            }
        }
    }
    let sites = geometry.row_sites(row, register.n_spins())?;
    Ok(Schedule {
        register,
        geometry,
        convention,
        active_row: row,
        sites,
        events,
    })
}
