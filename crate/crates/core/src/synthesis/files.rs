//! Problem and result files.
//!
//! Both are `key value...` lines with `#` comments. A problem file:
//!
//! ```text
//! mode enumerate
//! slots 11
//! exchanges 4
//! alphabet EX Z:+T Z:-T Z:+P Z:-P Z:D Z:-D X:+T X:-T X:+P X:-P X:D X:-D
//! target z_rotation
//! samples 20
//! tol 1e-10
//! ```
//!
//! `mode hadamard8` problems take `target` (`hadamard`, `identity` or
//! `random:<seed>`), `depth`, `ratio_z`, `ratio_x`, `starts`, `max_evals`.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ContinuousConfig, ContinuousResult, SynthesisProblem, SynthesisResult, TargetFamily};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_expm, CMatrix, Unitary};
use crate::templates::{format_sequence, parse_sequence, PulseTemplate};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuousTarget {
    Hadamard,
    Identity,
    Random(u64),
}

impl ContinuousTarget {
    pub fn unitary(&self) -> Unitary {
        match *self {
            ContinuousTarget::Hadamard => super::hadamard_pair(),
            ContinuousTarget::Identity => Unitary::identity(4),
            ContinuousTarget::Random(seed) => random_unitary4(seed),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ContinuousTarget::Hadamard => "hadamard".into(),
            ContinuousTarget::Identity => "identity".into(),
            ContinuousTarget::Random(s) => format!("random:{s}"),
        }
    }
}

/// `exp(−iH)` for a random Hermitian H with entries of order π.
pub fn random_unitary4(seed: u64) -> Unitary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = CMatrix::zeros(4);
    for r in 0..4 {
        h[(r, r)] = num_complex::Complex64::new(rng.gen_range(-3.0..3.0), 0.0);
        for c in r + 1..4 {
            let z = num_complex::Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            h[(r, c)] = z;
            h[(c, r)] = z.conj();
        }
    }
    hermitian_expm(&h, 1.0).expect("Hermitian by construction")
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemFile {
    Enumerate(SynthesisProblem),
    Continuous {
        target: ContinuousTarget,
        config: ContinuousConfig,
    },
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn one<T: std::str::FromStr>(line: usize, key: &str, rest: &[&str]) -> Result<T> {
    match rest {
        [v] => v.parse().map_err(|_| perr(line, format!("bad value for {key}: '{v}'"))),
        _ => Err(perr(line, format!("{key} takes one value"))),
    }
}

pub fn parse_problem(src: &str) -> Result<ProblemFile> {
    let mut kv: Vec<(usize, String, Vec<String>)> = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace().map(String::from);
        let key = toks.next().expect("nonempty");
        kv.push((idx + 1, key, toks.collect()));
    }
    let mode = kv
        .iter()
        .find(|(_, k, _)| k == "mode")
        .map(|(_, _, v)| v.join(" "))
        .unwrap_or_else(|| "enumerate".into());
    match mode.as_str() {
        "enumerate" => parse_enumerate(&kv).map(ProblemFile::Enumerate),
        "hadamard8" => parse_continuous(&kv),
        other => Err(perr(0, format!("unknown mode '{other}'"))),
    }
}

fn parse_enumerate(kv: &[(usize, String, Vec<String>)]) -> Result<SynthesisProblem> {
    let mut p = SynthesisProblem::new(0, 0, Vec::new(), TargetFamily::Identity);
    let mut have_slots = false;
    let mut have_target = false;
    for (line, key, vals) in kv {
        let line = *line;
        let v: Vec<&str> = vals.iter().map(String::as_str).collect();
        match key.as_str() {
            "mode" => {}
            "slots" => {
                p.slot_count = one(line, key, &v)?;
                have_slots = true;
            }
            "exchanges" => p.exchange_slots = one(line, key, &v)?,
            "alphabet" => {
                p.alphabet = parse_sequence(&v.join(" ")).map_err(|e| perr(line, e))?;
            }
            "target" => {
                let s: String = one(line, key, &v)?;
                p.target = s.parse().map_err(|e: String| perr(line, e))?;
                have_target = true;
            }
            "samples" => p.samples = one(line, key, &v)?,
            "tol" => p.tolerance = one(line, key, &v)?,
            "budget" => p.budget = one(line, key, &v)?,
            "seed" => p.seed = one(line, key, &v)?,
            "workers" => p.workers = Some(one(line, key, &v)?),
            "prune" => {
                p.prune = match one::<String>(line, key, &v)?.as_str() {
                    "on" | "true" => true,
                    "off" | "false" => false,
                    other => return Err(perr(line, format!("prune expects on/off, got '{other}'"))),
                }
            }
            other => return Err(perr(line, format!("unknown key '{other}'"))),
        }
    }
    if !have_slots {
        return Err(perr(0, "missing 'slots'"));
    }
    if !have_target {
        return Err(perr(0, "missing 'target'"));
    }
    p.validate()?;
    Ok(p)
}

fn parse_continuous(kv: &[(usize, String, Vec<String>)]) -> Result<ProblemFile> {
    let mut cfg = ContinuousConfig::default();
    let mut target = ContinuousTarget::Hadamard;
    for (line, key, vals) in kv {
        let line = *line;
        let v: Vec<&str> = vals.iter().map(String::as_str).collect();
        match key.as_str() {
            "mode" => {}
            "target" => {
                let s: String = one(line, key, &v)?;
                target = match s.as_str() {
                    "hadamard" => ContinuousTarget::Hadamard,
                    "identity" => ContinuousTarget::Identity,
                    _ => match s.strip_prefix("random:").map(str::parse::<u64>) {
                        Some(Ok(seed)) => ContinuousTarget::Random(seed),
                        _ => return Err(perr(line, format!("unknown target '{s}'"))),
                    },
                };
            }
            "depth" => cfg.depth = one(line, key, &v)?,
            "ratio_z" => cfg.ratio_z = one(line, key, &v)?,
            "ratio_x" => cfg.ratio_x = one(line, key, &v)?,
            "starts" => cfg.starts = one(line, key, &v)?,
            "max_evals" => cfg.max_evals = one(line, key, &v)?,
            "tol" => cfg.success_tol = one(line, key, &v)?,
            "budget" => cfg.budget = one(line, key, &v)?,
            "seed" => cfg.seed = one(line, key, &v)?,
            "workers" => cfg.workers = Some(one(line, key, &v)?),
            other => return Err(perr(line, format!("unknown key '{other}'"))),
        }
    }
    Ok(ProblemFile::Continuous { target, config: cfg })
}

pub fn write_problem(p: &SynthesisProblem) -> String {
    let mut s = String::new();
    writeln!(s, "mode enumerate").unwrap();
    writeln!(s, "slots {}", p.slot_count).unwrap();
    writeln!(s, "exchanges {}", p.exchange_slots).unwrap();
    writeln!(s, "alphabet {}", format_sequence(&p.alphabet)).unwrap();
    writeln!(s, "target {}", p.target).unwrap();
    writeln!(s, "samples {}", p.samples).unwrap();
    writeln!(s, "tol {:e}", p.tolerance).unwrap();
    writeln!(s, "budget {}", p.budget).unwrap();
    writeln!(s, "seed {}", p.seed).unwrap();
    writeln!(s, "prune {}", if p.prune { "on" } else { "off" }).unwrap();
    s
}

/// Result file; contains nothing that depends on timing or worker count.
pub fn write_result(p: &SynthesisProblem, r: &SynthesisResult) -> String {
    let mut s = String::new();
    s.push_str("# synthesis result\n");
    s.push_str(&write_problem(p));
    let st = &r.stats;
    writeln!(s, "field_sequences {}", st.field_sequences).unwrap();
    writeln!(s, "field_survivors {}", st.field_survivors).unwrap();
    writeln!(s, "candidates {}", st.candidates).unwrap();
    writeln!(s, "pruned {}", st.pruned).unwrap();
    writeln!(s, "rejected_dense {}", st.rejected_dense).unwrap();
    for (a, b) in &st.merged {
        writeln!(s, "merged {a} {b}").unwrap();
    }
    writeln!(s, "solutions {}", r.sequences.len()).unwrap();
    for (seq, c) in r.sequences.iter().zip(&r.certificates) {
        writeln!(s, "SEQ {c:.3e} {}", format_sequence(seq)).unwrap();
    }
    s
}

/// Sequences listed in a result file.
pub fn read_result_sequences(src: &str) -> Result<Vec<Vec<PulseTemplate>>> {
    let mut out = Vec::new();
    for (idx, line) in src.lines().enumerate() {
        if let Some(rest) = line.trim().strip_prefix("SEQ ") {
            let mut toks = rest.split_whitespace();
            let _cert = toks.next();
            let seq = parse_sequence(&toks.collect::<Vec<_>>().join(" ")).map_err(|e| perr(idx + 1, e))?;
            out.push(seq);
        }
    }
    Ok(out)
}

pub fn write_continuous_result(target: &ContinuousTarget, cfg: &ContinuousConfig, r: &ContinuousResult) -> String {
    let mut s = String::new();
    s.push_str("# continuous synthesis result\n");
    writeln!(s, "mode hadamard8").unwrap();
    writeln!(s, "target {}", target.name()).unwrap();
    writeln!(s, "depth {}", cfg.depth).unwrap();
    writeln!(s, "ratio_z {}", cfg.ratio_z).unwrap();
    writeln!(s, "ratio_x {}", cfg.ratio_x).unwrap();
    writeln!(s, "starts {}", cfg.starts).unwrap();
    writeln!(s, "max_evals {}", cfg.max_evals).unwrap();
    writeln!(s, "seed {}", cfg.seed).unwrap();
    writeln!(s, "tol {:e}", cfg.success_tol).unwrap();
    writeln!(s, "structures {}", r.fits.len()).unwrap();
    writeln!(s, "success {}", r.success).unwrap();
    if let Some(b) = r.best_fit() {
        let w: Vec<&str> = b.word.iter().map(|w| w.symbol()).collect();
        let p: Vec<String> = b.params.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(s, "best {:.6e} {} | {}", b.distance, w.join(" "), p.join(" ")).unwrap();
    }
    for f in &r.fits {
        let w: Vec<&str> = f.word.iter().map(|w| w.symbol()).collect();
        writeln!(s, "FIT {:.6e} {}", f.distance, w.join(" ")).unwrap();
    }
    s
}
