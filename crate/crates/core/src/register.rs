//! Primitive unitaries of an N-spin register: spin operators, Heisenberg
//! and XY exchange, and global Zeeman pulses.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, Unitary};

/// Bohr magneton, J/T (value used throughout the device estimates).
pub const BOHR_MAGNETON: f64 = 9.27e-24;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.0546e-34;

pub const MAX_SPINS: usize = 12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn symbol(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    /// Pauli matrix for this axis.
    pub fn pauli(self) -> CMatrix {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let rows: [[Complex64; 2]; 2] = match self {
            Axis::X => [[o, l], [l, o]],
            Axis::Y => [[o, -I], [I, o]],
            Axis::Z => [[l, o], [o, -l]],
        };
        CMatrix::from_rows(&[&rows[0], &rows[1]]).expect("2x2")
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(format!("unknown axis '{other}'")),
        }
    }
}

/// Which normalization converts field × time into a Zeeman angle.
///
/// `Eq2Half` is `θ = g μ_B B t / (2ħ)`. `EstimateFull` drops the ½, which
/// is the reading under which a π difference costs ≈ 18 mT·ns at g = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    #[default]
    Eq2Half,
    EstimateFull,
}

impl Convention {
    /// Angle per (g · tesla · second).
    pub fn angle_rate(self) -> f64 {
        match self {
            Convention::Eq2Half => BOHR_MAGNETON / (2.0 * HBAR),
            Convention::EstimateFull => BOHR_MAGNETON / HBAR,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Eq2Half => "eq2_half",
            Convention::EstimateFull => "estimate_full",
        }
    }
}

impl FromStr for Convention {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "eq2_half" => Ok(Convention::Eq2Half),
            "estimate_full" => Ok(Convention::EstimateFull),
            other => Err(format!("unknown convention '{other}'")),
        }
    }
}

/// N spins, indexed 0..N; spin 0 is the most significant tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterSpec {
    n_spins: usize,
}

impl RegisterSpec {
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins == 0 || n_spins > MAX_SPINS {
            return Err(Error::InvalidRegister(n_spins));
        }
        Ok(Self { n_spins })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.n_spins {
            return Err(Error::IndexOutOfRange {
                index: k,
                n_spins: self.n_spins,
            });
        }
        Ok(())
    }

    pub fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::EqualIndices(i));
        }
        Ok(())
    }

    /// Bit position of spin `k` inside a basis index.
    pub fn bit(&self, k: usize) -> usize {
        self.n_spins - 1 - k
    }
}

/// Where a pulse's angles came from, used to check them against the
/// Zeeman relation.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeemanProvenance {
    pub g: Vec<f64>,
    pub b_tesla: Vec<f64>,
    pub profile_integral: f64,
    pub convention: Convention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeemanPulseParams {
    pub axis: Axis,
    pub angles: Vec<f64>,
    pub provenance: Option<ZeemanProvenance>,
}

impl ZeemanPulseParams {
    pub fn new(axis: Axis, angles: Vec<f64>) -> Self {
        Self {
            axis,
            angles,
            provenance: None,
        }
    }

    pub fn validate(&self, reg: &RegisterSpec) -> Result<()> {
        if self.angles.len() != reg.n_spins() {
            return Err(Error::LengthMismatch {
                expected: reg.n_spins(),
                got: self.angles.len(),
            });
        }
        if self.angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("pulse angle"));
        }
        if let Some(p) = &self.provenance {
            let expect = zeeman_angles(&p.g, &p.b_tesla, p.profile_integral, p.convention)?;
            if expect.len() != self.angles.len() {
                return Err(Error::LengthMismatch {
                    expected: self.angles.len(),
                    got: expect.len(),
                });
            }
            for (k, (a, e)) in self.angles.iter().zip(&expect).enumerate() {
                let scale = a.abs().max(e.abs()).max(f64::MIN_POSITIVE);
                if (a - e).abs() > 1e-10 * scale {
                    return Err(Error::ProvenanceMismatch(k));
                }
            }
        }
        Ok(())
    }

    /// True when neighbouring spins `k, k+1` see distinct angles, i.e.
    /// `θ_k ≠ ±θ_{k+1}`.
    pub fn is_inhomogeneous(&self, k: usize) -> bool {
        match (self.angles.get(k), self.angles.get(k + 1)) {
            (Some(a), Some(b)) => (a - b).abs() > 1e-12 && (a + b).abs() > 1e-12,
            _ => false,
        }
    }
}

/// `S_k^α` embedded in the full register.
pub fn spin_operator(reg: &RegisterSpec, k: usize, axis: Axis) -> Result<CMatrix> {
    reg.check_index(k)?;
    let half = axis.pauli().scale(Complex64::new(0.5, 0.0));
    let id = CMatrix::identity(2);
    let mut m = CMatrix::identity(1);
    for q in 0..reg.n_spins() {
        m = kron(&m, if q == k { &half } else { &id });
    }
    Ok(m)
}

/// Permutation matrix exchanging the states of spins `i` and `j`.
pub fn swap_matrix(reg: &RegisterSpec, i: usize, j: usize) -> Result<CMatrix> {
    reg.check_pair(i, j)?;
    let (bi, bj) = (reg.bit(i), reg.bit(j));
    let mut m = CMatrix::zeros(reg.dim());
    for x in 0..reg.dim() {
        m[(swap_bits(x, bi, bj), x)] = Complex64::new(1.0, 0.0);
    }
    Ok(m)
}

pub(crate) fn swap_bits(x: usize, bi: usize, bj: usize) -> usize {
    if ((x >> bi) ^ (x >> bj)) & 1 == 1 {
        x ^ ((1 << bi) | (1 << bj))
    } else {
        x
    }
}

/// `exp(−iξ S_i·S_j) = e^{iξ/4}(cos(ξ/2) I − i sin(ξ/2) SWAP_ij)`.
pub fn exchange_unitary(reg: &RegisterSpec, i: usize, j: usize, xi: f64) -> Result<Unitary> {
    reg.check_pair(i, j)?;
    if !xi.is_finite() {
        return Err(Error::NonFinite("exchange angle"));
    }
    let (bi, bj) = (reg.bit(i), reg.bit(j));
    let global = Complex64::from_polar(1.0, xi / 4.0);
    let diag = global * (xi / 2.0).cos();
    let off = global * -I * (xi / 2.0).sin();
    let mut m = CMatrix::zeros(reg.dim());
    for x in 0..reg.dim() {
        let y = swap_bits(x, bi, bj);
        m[(x, x)] += diag;
        m[(y, x)] += off;
    }
    Ok(Unitary::from_trusted(m))
}

/// `exp(−iφ(S_i^x S_j^x + S_i^y S_j^y))`; rotates only inside the
/// `{|01⟩, |10⟩}` block of the pair.
pub fn xy_exchange_unitary(reg: &RegisterSpec, i: usize, j: usize, phi: f64) -> Result<Unitary> {
    reg.check_pair(i, j)?;
    if !phi.is_finite() {
        return Err(Error::NonFinite("XY angle"));
    }
    let (bi, bj) = (reg.bit(i), reg.bit(j));
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    let mut m = CMatrix::zeros(reg.dim());
    for x in 0..reg.dim() {
        let y = swap_bits(x, bi, bj);
        if y == x {
            m[(x, x)] = Complex64::new(1.0, 0.0);
        } else {
            m[(x, x)] = Complex64::new(c, 0.0);
            m[(y, x)] = -I * s;
        }
    }
    Ok(Unitary::from_trusted(m))
}

/// `e^{−iθ S^α}` on one spin: `cos(θ/2) I − i sin(θ/2) σ^α`.
pub fn single_spin_rotation(axis: Axis, theta: f64) -> CMatrix {
    let id = CMatrix::identity(2);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    id.scale(Complex64::new(c, 0.0)).add(&axis.pauli().scale(-I * s))
}

/// `V^α = Π_k e^{−iθ_k S_k^α}`.
pub fn global_field_unitary(reg: &RegisterSpec, p: &ZeemanPulseParams) -> Result<Unitary> {
    p.validate(reg)?;
    let mut m = CMatrix::identity(1);
    for &theta in &p.angles {
        m = kron(&m, &single_spin_rotation(p.axis, theta));
    }
    Ok(Unitary::from_trusted(m))
}

/// Zeeman angles `θ_k = c·g_k μ_B b_k ∫f dt / ħ` with `c = ½` under
/// [`Convention::Eq2Half`] and `c = 1` under [`Convention::EstimateFull`].
pub fn zeeman_angles(g: &[f64], b_tesla: &[f64], profile_integral: f64, convention: Convention) -> Result<Vec<f64>> {
    if g.len() != b_tesla.len() {
        return Err(Error::LengthMismatch {
            expected: g.len(),
            got: b_tesla.len(),
        });
    }
    if profile_integral < 0.0 {
        return Err(Error::NegativeDuration(profile_integral));
    }
    let rate = convention.angle_rate();
    Ok(g.iter()
        .zip(b_tesla)
        .map(|(gk, bk)| rate * gk * bk * profile_integral)
        .collect())
}
