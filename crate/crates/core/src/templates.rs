//! Symbolic pulse templates and their binding to concrete angles.
//!
//! A template is an exchange pulse on the addressed pair or a global field
//! pulse whose per-spin angles are named by symbol: `T` is the pair
//! `(θ_i, θ_j)`, `P` is `(φ_i, φ_j)` with `φ_i + φ_j = θ_i − θ_j`, and `D`
//! is a dark box `(θ, θ + π)` with θ arbitrary. Every symbol also assigns
//! an angle to bystander spins, because the field is global.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::circuit::{Circuit, PulseOp};
use crate::error::{Error, Result};
use crate::register::{Axis, RegisterSpec};

/// Angle symbol carried by a field template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// `c_θ·(θ) + c_φ·(φ)` with coefficients in {−1, 0, 1}. A single
    /// coefficient is a single box; both nonzero is one rectangular pulse
    /// whose area is the sum of a θ-box and a φ-box.
    Small { theta: i8, phi: i8 },
    /// `V(θ, θ+π)` or its inverse.
    Dark { inverse: bool },
}

impl Symbol {
    pub fn is_fused(self) -> bool {
        matches!(self, Symbol::Small { theta, phi } if theta != 0 && phi != 0)
    }

    pub fn inverse(self) -> Self {
        match self {
            Symbol::Small { theta, phi } => Symbol::Small {
                theta: -theta,
                phi: -phi,
            },
            Symbol::Dark { inverse } => Symbol::Dark { inverse: !inverse },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PulseTemplate {
    /// Exchange on the addressed pair with `ξ = quarter_turns·π/2`.
    Exchange {
        quarter_turns: i8,
    },
    Field {
        axis: Axis,
        symbol: Symbol,
    },
}

impl PulseTemplate {
    pub const SWAP: PulseTemplate = PulseTemplate::Exchange { quarter_turns: 2 };

    pub fn field(axis: Axis, symbol: Symbol) -> Self {
        PulseTemplate::Field { axis, symbol }
    }

    pub fn small(axis: Axis, theta: i8, phi: i8) -> Self {
        PulseTemplate::Field {
            axis,
            symbol: Symbol::Small { theta, phi },
        }
    }

    pub fn dark(axis: Axis, inverse: bool) -> Self {
        PulseTemplate::Field {
            axis,
            symbol: Symbol::Dark { inverse },
        }
    }

    pub fn is_exchange(&self) -> bool {
        matches!(self, PulseTemplate::Exchange { .. })
    }

    /// Same template with field axes x and z exchanged. Conjugating by a
    /// global Hadamard maps S^z ↔ S^x and leaves the isotropic exchange
    /// invariant, so a z-rotation circuit becomes an x-rotation circuit.
    pub fn swap_xz(self) -> Self {
        match self {
            PulseTemplate::Field { axis, symbol } => PulseTemplate::Field {
                axis: match axis {
                    Axis::X => Axis::Z,
                    Axis::Z => Axis::X,
                    Axis::Y => Axis::Y,
                },
                symbol,
            },
            ex => ex,
        }
    }
}

impl fmt::Display for PulseTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PulseTemplate::Exchange { quarter_turns: 2 } => write!(f, "EX"),
            PulseTemplate::Exchange { quarter_turns } => write!(f, "EX:{quarter_turns}"),
            PulseTemplate::Field { axis, symbol } => {
                let a = axis.symbol().to_ascii_uppercase();
                match symbol {
                    Symbol::Dark { inverse: false } => write!(f, "{a}:D"),
                    Symbol::Dark { inverse: true } => write!(f, "{a}:-D"),
                    Symbol::Small { theta, phi } => {
                        write!(f, "{a}:")?;
                        for (c, name) in [(theta, 'T'), (phi, 'P')] {
                            match c {
                                1 => write!(f, "+{name}")?,
                                -1 => write!(f, "-{name}")?,
                                _ => {}
                            }
                        }
                        Ok(())
                    }
                }
            }
        }
    }
}

impl FromStr for PulseTemplate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "EX" {
            return Ok(PulseTemplate::SWAP);
        }
        if let Some(k) = s.strip_prefix("EX:") {
            let q: i8 = k.parse().map_err(|_| format!("bad exchange token '{s}'"))?;
            if q == 0 || q.abs() > 4 {
                return Err(format!("exchange quarter turns out of range in '{s}'"));
            }
            return Ok(PulseTemplate::Exchange { quarter_turns: q });
        }
        let (axis, sym) = s.split_once(':').ok_or_else(|| format!("bad template token '{s}'"))?;
        let axis: Axis = axis.parse()?;
        let symbol = match sym {
            "D" | "+D" => Symbol::Dark { inverse: false },
            "-D" => Symbol::Dark { inverse: true },
            _ => {
                let (mut theta, mut phi) = (0i8, 0i8);
                let mut rest = sym;
                while !rest.is_empty() {
                    let sign = match rest.as_bytes()[0] {
                        b'+' => 1,
                        b'-' => -1,
                        _ => return Err(format!("bad symbol '{sym}'")),
                    };
                    let slot = match rest.as_bytes().get(1) {
                        Some(b'T') => &mut theta,
                        Some(b'P') => &mut phi,
                        _ => return Err(format!("bad symbol '{sym}'")),
                    };
                    if *slot != 0 {
                        return Err(format!("repeated term in '{sym}'"));
                    }
                    *slot = sign;
                    rest = &rest[2..];
                }
                if theta == 0 && phi == 0 {
                    return Err(format!("empty symbol in '{s}'"));
                }
                Symbol::Small { theta, phi }
            }
        };
        Ok(PulseTemplate::Field { axis, symbol })
    }
}

pub fn parse_sequence(s: &str) -> Result<Vec<PulseTemplate>, String> {
    s.split_whitespace().map(str::parse).collect()
}

pub fn format_sequence(seq: &[PulseTemplate]) -> String {
    seq.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

/// The box vocabulary: six angle symbols on each of the x and z axes.
pub fn box_alphabet() -> Vec<PulseTemplate> {
    let mut out = vec![PulseTemplate::SWAP];
    for axis in [Axis::Z, Axis::X] {
        for (t, p) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            out.push(PulseTemplate::small(axis, t, p));
        }
        out.push(PulseTemplate::dark(axis, false));
        out.push(PulseTemplate::dark(axis, true));
    }
    out
}

/// Box vocabulary plus fused θ±φ boxes on both axes.
pub fn fused_alphabet() -> Vec<PulseTemplate> {
    let mut out = box_alphabet();
    for axis in [Axis::Z, Axis::X] {
        for (t, p) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            out.push(PulseTemplate::small(axis, t, p));
        }
    }
    out
}

/// 11-step circuit for `e^{−i2(θ_i−θ_j)S_i^z}`: a swap-refocused block
/// that gives spin i `+θ` and spin j `−θ`, then a tilde-swap block that
/// gives both `+θ` through the φ pulses. The θ-box closing the first block
/// and the φ-box opening the second are one fused pulse.
pub const Z_ROTATION_TEMPLATE: &str = "EX Z:-T EX Z:+T+P X:D EX X:-D Z:-P X:D EX X:-D";

pub fn z_rotation_template() -> Vec<PulseTemplate> {
    parse_sequence(Z_ROTATION_TEMPLATE).expect("built-in template parses")
}

/// Concrete angles for one field axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBinding {
    /// θ-box angle per spin.
    pub theta: Vec<f64>,
    /// φ-box angle per spin.
    pub phi: Vec<f64>,
    /// Dark-box angle per spin; `dark[j] = dark[i] + π`.
    pub dark: Vec<f64>,
}

impl AxisBinding {
    /// θ and φ-box angles proportional to `weights` (device constants),
    /// with `θ_i − θ_j = delta`, and the dark box realizable on the same
    /// weights.
    pub fn from_weights(weights: &[f64], i: usize, j: usize, delta: f64) -> Result<Self> {
        let (wi, wj) = (weights[i], weights[j]);
        if (wi - wj).abs() < 1e-12 || (wi + wj).abs() < 1e-12 {
            return Err(Error::DegenerateWeights(i, j));
        }
        let lambda = delta / (wi - wj);
        let lambda_phi = lambda * (wi - wj) / (wi + wj);
        let lambda_dark = PI / (wj - wi);
        Ok(Self {
            theta: weights.iter().map(|w| lambda * w).collect(),
            phi: weights.iter().map(|w| lambda_phi * w).collect(),
            dark: weights.iter().map(|w| lambda_dark * w).collect(),
        })
    }

    /// Random angles obeying the sampling rules: θ_i, θ_j in (0.1, π−0.1),
    /// separated by more than 0.05; φ_k = θ_k(θ_i−θ_j)/(θ_i+θ_j); dark θ
    /// and every bystander entry drawn independently.
    pub fn random<R: Rng>(rng: &mut R, n: usize, i: usize, j: usize) -> Self {
        let lo = 0.1;
        let hi = PI - 0.1;
        let (ti, tj) = loop {
            let a = rng.gen_range(lo..hi);
            let b = rng.gen_range(lo..hi);
            if (a - b).abs() > 0.05 && (a + b).abs() > 0.05 {
                break (a, b);
            }
        };
        let mut theta: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        theta[i] = ti;
        theta[j] = tj;
        let ratio = (ti - tj) / (ti + tj);
        let phi = theta.iter().map(|t| t * ratio).collect();
        let d = rng.gen_range(-PI..PI);
        let mut dark: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
        dark[i] = d;
        dark[j] = d + PI;
        Self { theta, phi, dark }
    }

    /// `θ_i − θ_j`.
    pub fn delta(&self, i: usize, j: usize) -> f64 {
        self.theta[i] - self.theta[j]
    }
}

/// Everything needed to turn templates into pulse operations.
#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub n_spins: usize,
    pub i: usize,
    pub j: usize,
    pub z: AxisBinding,
    pub x: AxisBinding,
}

impl Binding {
    pub fn random<R: Rng>(rng: &mut R, n_spins: usize, i: usize, j: usize) -> Self {
        let z = AxisBinding::random(rng, n_spins, i, j);
        let x = AxisBinding::random(rng, n_spins, i, j);
        Self { n_spins, i, j, z, x }
    }

    pub fn axis(&self, axis: Axis) -> Result<&AxisBinding> {
        match axis {
            Axis::Z => Ok(&self.z),
            Axis::X => Ok(&self.x),
            Axis::Y => Err(Error::InvalidProblem("templates bind x and z only".into())),
        }
    }

    pub fn field_angles(&self, axis: Axis, symbol: Symbol) -> Result<Vec<f64>> {
        let b = self.axis(axis)?;
        Ok(match symbol {
            Symbol::Small { theta, phi } => b
                .theta
                .iter()
                .zip(&b.phi)
                .map(|(t, p)| f64::from(theta) * t + f64::from(phi) * p)
                .collect(),
            Symbol::Dark { inverse } => {
                let s = if inverse { -1.0 } else { 1.0 };
                b.dark.iter().map(|d| s * d).collect()
            }
        })
    }

    pub fn op(&self, t: &PulseTemplate) -> Result<PulseOp> {
        Ok(match *t {
            PulseTemplate::Exchange { quarter_turns } => {
                PulseOp::exchange(self.i, self.j, f64::from(quarter_turns) * PI / 2.0)
            }
            PulseTemplate::Field { axis, symbol } => PulseOp::field(axis, self.field_angles(axis, symbol)?),
        })
    }

    pub fn circuit(&self, seq: &[PulseTemplate]) -> Result<Circuit> {
        let reg = RegisterSpec::new(self.n_spins)?;
        let ops = seq.iter().map(|t| self.op(t)).collect::<Result<Vec<_>>>()?;
        Circuit::from_ops(reg, ops)
    }
}
