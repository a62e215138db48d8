use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use globalspin::suite::Check;
use globalspin::Unitary;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    JsonLines,
}

pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub inputs: Vec<(String, String)>,
    pub info: Vec<(String, Value)>,
    pub checks: Vec<Check>,
    started: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Digest of a unitary's entries rounded to nine decimals.
pub fn unitary_digest(u: &Unitary) -> String {
    let fmt = |x: f64| {
        let s = format!("{x:.9}");
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    };
    let mut text = String::new();
    for z in u.matrix().as_slice() {
        text.push_str(&fmt(z.re));
        text.push(' ');
        text.push_str(&fmt(z.im));
        text.push('\n');
    }
    sha256_hex(text.as_bytes())
}

impl RunReport {
    pub fn new(command: String, seed: u64) -> Self {
        Self {
            command,
            seed,
            inputs: Vec::new(),
            info: Vec::new(),
            checks: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push((path.display().to_string(), sha256_hex(bytes)));
    }

    pub fn info(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.info.push((key.into(), value.into()));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn emit(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        let wall = self.started.elapsed().as_secs_f64();
        let passed = self.checks.iter().filter(|c| c.pass).count();
        match format {
            Format::Human => {
                writeln!(out, "command  {}", self.command)?;
                writeln!(out, "seed     {}", self.seed)?;
                for (path, digest) in &self.inputs {
                    writeln!(out, "input    {path} sha256:{digest}")?;
                }
                for (k, v) in &self.info {
                    match v {
                        Value::String(s) => writeln!(out, "  {k}: {s}")?,
                        other => writeln!(out, "  {k}: {other}")?,
                    }
                }
                for c in &self.checks {
                    writeln!(
                        out,
                        "{} {}  measured {:.6e}  threshold {:.6e}",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.name,
                        c.measured,
                        c.threshold
                    )?;
                }
                writeln!(
                    out,
                    "{}  {passed}/{} checks  {wall:.3} s",
                    if self.pass() { "OK" } else { "FAILED" },
                    self.checks.len()
                )?;
            }
            Format::JsonLines => {
                let inputs: Vec<Value> = self
                    .inputs
                    .iter()
                    .map(|(p, d)| json!({"path": p, "sha256": d}))
                    .collect();
                let line = |v: Value, out: &mut dyn Write| writeln!(out, "{v}");
                line(
                    json!({"type": "run", "command": self.command, "seed": self.seed, "inputs": inputs}),
                    out,
                )?;
                for (k, v) in &self.info {
                    line(json!({"type": "info", "key": k, "value": v}), out)?;
                }
                for c in &self.checks {
                    line(
                        json!({"type": "check", "name": c.name, "measured": finite(c.measured),
                               "threshold": finite(c.threshold), "pass": c.pass}),
                        out,
                    )?;
                }
                line(
                    json!({"type": "summary", "pass": self.pass(), "passed": passed,
                           "checks": self.checks.len(), "wall_seconds": wall}),
                    out,
                )?;
            }
        }
        Ok(())
    }

    /// Check table as CSV.
    pub fn write_checks_csv(&self, path: &Path) -> io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["name", "measured", "threshold", "pass"])?;
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                format!("{:e}", c.measured),
                format!("{:e}", c.threshold),
                c.pass.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// JSON has no infinities or NaN; those become strings.
fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}
