//! Randomized identity checks over the circuit builders.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{
    controlled_phase_target, cp_circuit, evaluate, parallel_apply, swap_conjugation, tilde_swap_sides, verify_target,
    verify_unitary, xy_cp_circuit, xy_single_spin_circuit, zz_phase, Fill,
};
use crate::error::Result;
use crate::linalg::{exact_distance, phase_distance, Unitary};
use crate::register::RegisterSpec;
use crate::tolerances::{COMPOSITE_TOL, IDENTITY_TOL};

/// One numeric check: the measured value passes when it is at most the
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }

    /// Passes when `|measured − expected| ≤ threshold`; `measured` keeps
    /// the raw value.
    pub fn near(name: impl Into<String>, measured: f64, expected: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: (measured - expected).abs() <= threshold,
        }
    }

    /// Passes when the measured value reaches the threshold.
    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured >= threshold,
        }
    }

    /// Passes when `lo ≤ measured ≤ hi`; the reported threshold is `hi`.
    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold: hi,
            pass: (lo..=hi).contains(&measured),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Swap,
    Tilde,
    Cp,
    Xy,
    XyCp,
    Parallel,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["all", "swap", "tilde", "cp", "xy", "xycp", "parallel"];

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Swap,
                Suite::Tilde,
                Suite::Cp,
                Suite::Xy,
                Suite::XyCp,
                Suite::Parallel,
            ],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Swap => "swap",
            Suite::Tilde => "tilde",
            Suite::Cp => "cp",
            Suite::Xy => "xy",
            Suite::XyCp => "xycp",
            Suite::Parallel => "parallel",
        }
    }

    /// Per-identity stream so that a suite draws the same parameters
    /// whether it runs alone or under `all`.
    fn stream(self) -> u64 {
        match self {
            Suite::All => 0,
            Suite::Swap => 1,
            Suite::Tilde => 2,
            Suite::Cp => 3,
            Suite::Xy => 4,
            Suite::XyCp => 5,
            Suite::Parallel => 6,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "all" => Suite::All,
            "swap" => Suite::Swap,
            "tilde" => Suite::Tilde,
            "cp" => Suite::Cp,
            "xy" => Suite::Xy,
            "xycp" => Suite::XyCp,
            "parallel" => Suite::Parallel,
            other => {
                return Err(format!(
                    "unknown suite '{other}' (expected one of {})",
                    Suite::NAMES.join(", ")
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
    /// Replaces every threshold when set.
    pub tol: Option<f64>,
    /// Scalar the literal tilde-swap check expects.
    pub tilde_factor: Complex64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 0,
            tol: None,
            tilde_factor: Complex64::new(0.0, 1.0),
        }
    }
}

/// Worst value over the samples of each named quantity.
struct Worst {
    names: Vec<(String, f64, f64)>,
}

impl Worst {
    fn new() -> Self {
        Self { names: Vec::new() }
    }

    fn record(&mut self, name: &str, value: f64, threshold: f64) {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        match self.names.iter_mut().find(|(n, _, _)| n == name) {
            Some(e) => e.1 = e.1.max(value),
            None => self.names.push((name.to_string(), value, threshold)),
        }
    }

    fn finish(self, tol: Option<f64>) -> Vec<Check> {
        self.names
            .into_iter()
            .map(|(n, v, t)| Check::at_most(n, v, tol.unwrap_or(t)))
            .collect()
    }
}

fn angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-2.0 * PI..2.0 * PI)
}

fn fill(rng: &mut ChaCha8Rng, n: usize) -> Fill {
    Fill::Explicit((0..n).map(|_| angle(rng)).collect())
}

fn run_one(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (suite.stream() << 56));
    let r2 = RegisterSpec::new(2)?;
    let r4 = RegisterSpec::new(4)?;
    let mut w = Worst::new();
    for _ in 0..cfg.samples {
        match suite {
            Suite::Swap => {
                let (c, t) = swap_conjugation(0, 1, angle(&mut rng), angle(&mut rng), &r2, &Fill::Base)?;
                w.record(
                    "swap.distance",
                    verify_target(&c, &t, IDENTITY_TOL)?.distance,
                    IDENTITY_TOL,
                );
                let f = fill(&mut rng, 4);
                let (c, t) = swap_conjugation(1, 2, angle(&mut rng), angle(&mut rng), &r4, &f)?;
                let rep = verify_target(&c, &t, IDENTITY_TOL)?;
                w.record("swap.n4.distance", rep.distance, IDENTITY_TOL);
                w.record("swap.n4.bystander", rep.bystander_error, COMPOSITE_TOL);
            }
            Suite::Tilde => {
                let (theta, ti, tj) = (angle(&mut rng), angle(&mut rng), angle(&mut rng));
                let (lhs, rhs) = tilde_swap_sides(0, 1, theta, ti, tj, &r2)?;
                let literal = Unitary::from_trusted(rhs.matrix().scale(cfg.tilde_factor));
                w.record("tilde.literal", exact_distance(&lhs, &literal)?, IDENTITY_TOL);
                w.record("tilde.up_to_phase", phase_distance(&lhs, &rhs)?, IDENTITY_TOL);
                let (lhs, rhs) = tilde_swap_sides(1, 2, theta, ti, tj, &r4)?;
                w.record("tilde.n4.up_to_phase", phase_distance(&lhs, &rhs)?, IDENTITY_TOL);
            }
            Suite::Cp => {
                let theta = angle(&mut rng);
                let (c, t) = cp_circuit(0, 1, theta, &r2, &Fill::Base)?;
                let u = evaluate(&c)?;
                w.record("cp.exact", exact_distance(&u, &t.unitary)?, COMPOSITE_TOL);
                let lz = verify_unitary(&u, &r2, &controlled_phase_target(&r2, 0, 1)?, COMPOSITE_TOL)?;
                w.record("cp.local_z", lz.distance, COMPOSITE_TOL);
                let f = fill(&mut rng, 4);
                let (c, t) = cp_circuit(1, 2, theta, &r4, &f)?;
                let rep = verify_target(&c, &t, COMPOSITE_TOL)?;
                w.record("cp.n4.exact", rep.distance, COMPOSITE_TOL);
                w.record("cp.n4.bystander", rep.bystander_error, COMPOSITE_TOL);
            }
            Suite::Xy => {
                let (ti, tj) = (angle(&mut rng), angle(&mut rng));
                let (c, t) = xy_single_spin_circuit(0, 1, ti, tj, &r2, &Fill::Base)?;
                w.record(
                    "xy.distance",
                    verify_target(&c, &t, COMPOSITE_TOL)?.distance,
                    COMPOSITE_TOL,
                );
                let f = fill(&mut rng, 4);
                let (c, t) = xy_single_spin_circuit(1, 2, ti, tj, &r4, &f)?;
                let rep = verify_target(&c, &t, COMPOSITE_TOL)?;
                w.record("xy.n4.distance", rep.distance, COMPOSITE_TOL);
                w.record("xy.n4.bystander", rep.bystander_error, COMPOSITE_TOL);
            }
            Suite::XyCp => {
                let tj = angle(&mut rng);
                let (c, t) = xy_cp_circuit(0, 1, tj, &r2)?;
                w.record(
                    "xycp.distance",
                    verify_target(&c, &t, COMPOSITE_TOL)?.distance,
                    COMPOSITE_TOL,
                );
                let (c, t) = xy_cp_circuit(1, 2, tj, &r4)?;
                let rep = verify_target(&c, &t, COMPOSITE_TOL)?;
                w.record("xycp.n4.distance", rep.distance, COMPOSITE_TOL);
                w.record("xycp.n4.bystander", rep.bystander_error, COMPOSITE_TOL);
            }
            Suite::Parallel => {
                let (template, _) = cp_circuit(0, 1, angle(&mut rng), &r2, &Fill::Base)?;
                let c = parallel_apply(&template, &[(0, 1), (2, 3)], &r4)?;
                let target = zz_phase(&r4, 0, 1, PI)?.mul(&zz_phase(&r4, 2, 3, PI)?);
                w.record(
                    "parallel.exact",
                    exact_distance(&evaluate(&c)?, &target)?,
                    COMPOSITE_TOL,
                );
            }
            Suite::All => unreachable!("expanded by run_suite"),
        }
    }
    Ok(w.finish(cfg.tol))
}

/// Runs the selected identities over `cfg.samples` random draws each and
/// reports the worst distance per quantity.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in suite.members() {
        out.extend(run_one(s, cfg)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_but_the_literal_tilde_passes() {
        let checks = run_suite(
            Suite::All,
            &SuiteConfig {
                samples: 20,
                ..Default::default()
            },
        )
        .unwrap();
        for c in &checks {
            assert_eq!(c.pass, c.name != "tilde.literal", "{c:?}");
        }
        let fixed = SuiteConfig {
            samples: 20,
            tilde_factor: Complex64::new(0.0, -1.0),
            ..Default::default()
        };
        assert!(run_suite(Suite::Tilde, &fixed).unwrap().iter().all(|c| c.pass));
    }

    #[test]
    fn suites_are_seeded() {
        let cfg = SuiteConfig {
            samples: 5,
            seed: 42,
            ..Default::default()
        };
        let a = run_suite(Suite::Cp, &cfg).unwrap();
        assert_eq!(a, run_suite(Suite::Cp, &cfg).unwrap());
        let all = run_suite(Suite::All, &cfg).unwrap();
        assert!(a.iter().all(|c| all.contains(c)));
        assert!("bogus".parse::<Suite>().is_err());
    }
}
