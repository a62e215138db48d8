//! Pulse circuits: representation, evaluation to unitaries, and checks
//! against gate targets.

mod builders;
mod euler;
pub mod text;

pub use builders::{
    controlled_phase_target, cp_circuit, cp_circuit_on_device, determine_xy_cp_reading, parallel_apply, rotation_block,
    swap_conjugation, tilde_swap, tilde_swap_identity, tilde_swap_sides, xy_cp_circuit, xy_single_spin_circuit,
    zz_phase, Fill, TildeSwapCheck, XyCpReading,
};
pub use euler::{euler_zxz, su2_compile, EulerAngles, FieldWeights};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{exact_distance, matrix_phase_distance, phase_distance, relative_phase, CMatrix, Unitary};
use crate::register::{
    exchange_unitary, global_field_unitary, spin_operator, swap_bits, xy_exchange_unitary, Axis, RegisterSpec,
    ZeemanPulseParams,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub enum OpKind {
    Exchange { i: usize, j: usize, xi: f64 },
    XYExchange { i: usize, j: usize, phi: f64 },
    GlobalField { axis: Axis, angles: Vec<f64> },
}

/// One elementary step.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseOp {
    pub kind: OpKind,
    /// Seconds; consulted by the scheduler only.
    pub duration_hint: Option<f64>,
}

impl PulseOp {
    pub fn exchange(i: usize, j: usize, xi: f64) -> Self {
        Self {
            kind: OpKind::Exchange { i, j, xi },
            duration_hint: None,
        }
    }

    pub fn xy(i: usize, j: usize, phi: f64) -> Self {
        Self {
            kind: OpKind::XYExchange { i, j, phi },
            duration_hint: None,
        }
    }

    pub fn field(axis: Axis, angles: Vec<f64>) -> Self {
        Self {
            kind: OpKind::GlobalField { axis, angles },
            duration_hint: None,
        }
    }

    pub fn with_duration(mut self, seconds: f64) -> Self {
        self.duration_hint = Some(seconds);
        self
    }

    pub fn is_exchange(&self) -> bool {
        matches!(self.kind, OpKind::Exchange { .. } | OpKind::XYExchange { .. })
    }

    pub fn is_field(&self) -> bool {
        matches!(self.kind, OpKind::GlobalField { .. })
    }

    /// Inverse pulse (negated angle).
    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            OpKind::Exchange { i, j, xi } => OpKind::Exchange { i: *i, j: *j, xi: -xi },
            OpKind::XYExchange { i, j, phi } => OpKind::XYExchange {
                i: *i,
                j: *j,
                phi: -phi,
            },
            OpKind::GlobalField { axis, angles } => OpKind::GlobalField {
                axis: *axis,
                angles: angles.iter().map(|a| -a).collect(),
            },
        };
        Self {
            kind,
            duration_hint: self.duration_hint,
        }
    }

    pub fn validate(&self, reg: &RegisterSpec) -> Result<()> {
        match &self.kind {
            OpKind::Exchange { i, j, xi } | OpKind::XYExchange { i, j, phi: xi } => {
                reg.check_pair(*i, *j)?;
                if !xi.is_finite() {
                    return Err(Error::NonFinite("exchange angle"));
                }
            }
            OpKind::GlobalField { angles, .. } => {
                if angles.len() != reg.n_spins() {
                    return Err(Error::LengthMismatch {
                        expected: reg.n_spins(),
                        got: angles.len(),
                    });
                }
                if angles.iter().any(|a| !a.is_finite()) {
                    return Err(Error::NonFinite("pulse angle"));
                }
            }
        }
        Ok(())
    }

    /// Dense unitary from the closed forms of the register module.
    pub fn unitary(&self, reg: &RegisterSpec) -> Result<Unitary> {
        match &self.kind {
            OpKind::Exchange { i, j, xi } => exchange_unitary(reg, *i, *j, *xi),
            OpKind::XYExchange { i, j, phi } => xy_exchange_unitary(reg, *i, *j, *phi),
            OpKind::GlobalField { axis, angles } => {
                global_field_unitary(reg, &ZeemanPulseParams::new(*axis, angles.clone()))
            }
        }
    }

    /// Left-multiplies `m` by this op's unitary without forming it.
    pub fn apply_left(&self, reg: &RegisterSpec, m: &mut CMatrix) -> Result<()> {
        self.validate(reg)?;
        let dim = reg.dim();
        if m.dim() != dim {
            return Err(Error::DimensionMismatch(m.dim(), dim));
        }
        match &self.kind {
            OpKind::Exchange { i, j, xi } => {
                let g = Complex64::from_polar(1.0, xi / 4.0);
                let d = g * (xi / 2.0).cos();
                let o = g * -I * (xi / 2.0).sin();
                mix_pair_rows(m, reg.bit(*i), reg.bit(*j), d, o, d + o);
            }
            OpKind::XYExchange { i, j, phi } => {
                let d = Complex64::new((phi / 2.0).cos(), 0.0);
                let o = -I * (phi / 2.0).sin();
                mix_pair_rows(m, reg.bit(*i), reg.bit(*j), d, o, Complex64::new(1.0, 0.0));
            }
            OpKind::GlobalField { axis, angles } => match axis {
                Axis::Z => {
                    let n = reg.n_spins();
                    for x in 0..dim {
                        let mut phase = 0.0;
                        for (k, a) in angles.iter().enumerate() {
                            let up = (x >> (n - 1 - k)) & 1 == 0;
                            phase += if up { -a / 2.0 } else { a / 2.0 };
                        }
                        let f = Complex64::from_polar(1.0, phase);
                        for v in &mut m.as_mut_slice()[x * dim..(x + 1) * dim] {
                            *v *= f;
                        }
                    }
                }
                Axis::X | Axis::Y => {
                    for (k, &a) in angles.iter().enumerate() {
                        if a == 0.0 {
                            continue;
                        }
                        let (c, s) = ((a / 2.0).cos(), (a / 2.0).sin());
                        // e^{−iθS^α} = c I − i s σ^α
                        let (m01, m10) = match axis {
                            Axis::X => (-I * s, -I * s),
                            _ => (Complex64::new(-s, 0.0), Complex64::new(s, 0.0)),
                        };
                        rotate_bit_rows(m, reg.bit(k), Complex64::new(c, 0.0), m01, m10);
                    }
                }
            },
        }
        Ok(())
    }
}

/// Rows x and y = swap(x) mix as `[d o; o d]`; rows fixed by the swap are
/// scaled by `fixed`.
fn mix_pair_rows(m: &mut CMatrix, bi: usize, bj: usize, d: Complex64, o: Complex64, fixed: Complex64) {
    let dim = m.dim();
    let data = m.as_mut_slice();
    for x in 0..dim {
        let y = swap_bits(x, bi, bj);
        if y == x {
            for v in &mut data[x * dim..(x + 1) * dim] {
                *v *= fixed;
            }
        } else if x < y {
            for c in 0..dim {
                let (a, b) = (data[x * dim + c], data[y * dim + c]);
                data[x * dim + c] = d * a + o * b;
                data[y * dim + c] = o * a + d * b;
            }
        }
    }
}

/// Single-spin gate `[c m01; m10 c]` on the given bit.
fn rotate_bit_rows(m: &mut CMatrix, bit: usize, c: Complex64, m01: Complex64, m10: Complex64) {
    let dim = m.dim();
    let data = m.as_mut_slice();
    for x in 0..dim {
        if (x >> bit) & 1 == 1 {
            continue;
        }
        let y = x | (1 << bit);
        for col in 0..dim {
            let (a, b) = (data[x * dim + col], data[y * dim + col]);
            data[x * dim + col] = c * a + m01 * b;
            data[y * dim + col] = m10 * a + c * b;
        }
    }
}

/// Ordered pulse sequence on a register; the first op acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub register: RegisterSpec,
    pub ops: Vec<PulseOp>,
}

impl Circuit {
    pub fn new(register: RegisterSpec) -> Self {
        Self {
            register,
            ops: Vec::new(),
        }
    }

    pub fn from_ops(register: RegisterSpec, ops: Vec<PulseOp>) -> Result<Self> {
        for op in &ops {
            op.validate(&register)?;
        }
        Ok(Self { register, ops })
    }

    pub fn push(&mut self, op: PulseOp) -> Result<()> {
        op.validate(&self.register)?;
        self.ops.push(op);
        Ok(())
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if self.register != other.register {
            return Err(Error::DimensionMismatch(
                self.register.n_spins(),
                other.register.n_spins(),
            ));
        }
        let mut ops = self.ops.clone();
        ops.extend(other.ops.iter().cloned());
        Ok(Circuit {
            register: self.register,
            ops,
        })
    }

    pub fn step_count(&self) -> usize {
        self.ops.len()
    }

    pub fn exchange_count(&self) -> usize {
        self.ops.iter().filter(|o| o.is_exchange()).count()
    }

    pub fn field_count(&self) -> usize {
        self.ops.iter().filter(|o| o.is_field()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Ordered product of the circuit's ops (first op rightmost).
pub fn evaluate(c: &Circuit) -> Result<Unitary> {
    let mut m = CMatrix::identity(c.register.dim());
    for op in &c.ops {
        op.apply_left(&c.register, &mut m)?;
    }
    Ok(Unitary::from_trusted(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    Exact,
    UpToGlobalPhase,
    /// Up to a global phase and z rotations on each acted spin.
    UpToLocalZ,
}

#[derive(Debug, Clone)]
pub struct GateTarget {
    pub unitary: Unitary,
    pub acted_spins: Vec<usize>,
    pub equivalence: Equivalence,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub equivalence: Equivalence,
    /// Distance under the target's equivalence.
    pub distance: f64,
    /// Plain phase distance, reported for every equivalence.
    pub phase_distance: f64,
    /// `e^{iφ}` with `evaluate(c) ≈ e^{iφ}·target`.
    pub global_factor: Complex64,
    /// Max commutator norm with S^z_k, S^x_k over bystanders k.
    pub bystander_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Max over bystander spins of `‖[U, S_k^z]‖` and `‖[U, S_k^x]‖`.
pub fn bystander_error(u: &Unitary, reg: &RegisterSpec, acted: &[usize]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in (0..reg.n_spins()).filter(|k| !acted.contains(k)) {
        for axis in [Axis::Z, Axis::X] {
            let s = spin_operator(reg, k, axis)?;
            worst = worst.max(u.matrix().commutator(&s).max_abs());
        }
    }
    Ok(worst)
}

pub fn verify_target(c: &Circuit, t: &GateTarget, tol: f64) -> Result<VerificationReport> {
    let u = evaluate(c)?;
    verify_unitary(&u, &c.register, t, tol)
}

pub fn verify_unitary(u: &Unitary, reg: &RegisterSpec, t: &GateTarget, tol: f64) -> Result<VerificationReport> {
    if u.dim() != t.unitary.dim() {
        return Err(Error::DimensionMismatch(u.dim(), t.unitary.dim()));
    }
    let pd = phase_distance(u, &t.unitary)?;
    let distance = match t.equivalence {
        Equivalence::Exact => exact_distance(u, &t.unitary)?,
        Equivalence::UpToGlobalPhase => pd,
        Equivalence::UpToLocalZ => local_z_distance(u, &t.unitary, reg, &t.acted_spins)?.0,
    };
    let global_factor = relative_phase(u, &t.unitary)?;
    let by = bystander_error(u, reg, &t.acted_spins)?;
    Ok(VerificationReport {
        equivalence: t.equivalence,
        distance,
        phase_distance: pd,
        global_factor,
        bystander_error: by,
        tolerance: tol,
        passed: distance <= tol && by <= tol,
    })
}

/// Distance between `u` and `target` after absorbing the best z rotation on
/// each spin in `spins` into `u`; returns the distance and the per-spin
/// angles `α_k` of `Π e^{−iα_k S_k^z}` applied after `u`.
///
/// Each coordinate maximizes `|A + e^{iα}B|` in closed form
/// (`α = arg A − arg B`); sweeps repeat until the overlap stops growing.
pub fn local_z_distance(u: &Unitary, target: &Unitary, reg: &RegisterSpec, spins: &[usize]) -> Result<(f64, Vec<f64>)> {
    if u.dim() != target.dim() {
        return Err(Error::DimensionMismatch(u.dim(), target.dim()));
    }
    let dim = reg.dim();
    // w_x = (U T†)_{xx}: overlap tr(T† D U) = Σ_x D_xx w_x for diagonal D.
    let ut = u.matrix().matmul(&target.matrix().adjoint());
    let w: Vec<Complex64> = (0..dim).map(|x| ut[(x, x)]).collect();
    let mut alphas = vec![0.0; spins.len()];
    let diag = |alphas: &[f64]| -> Vec<Complex64> {
        (0..dim)
            .map(|x| {
                let mut ph = 0.0;
                for (a, &k) in alphas.iter().zip(spins) {
                    let up = (x >> reg.bit(k)) & 1 == 0;
                    ph += if up { -a / 2.0 } else { a / 2.0 };
                }
                Complex64::from_polar(1.0, ph)
            })
            .collect()
    };
    let overlap = |alphas: &[f64]| -> f64 {
        diag(alphas)
            .iter()
            .zip(&w)
            .map(|(d, wx)| d * wx)
            .sum::<Complex64>()
            .norm()
    };
    let mut best = overlap(&alphas);
    for _ in 0..64 {
        for idx in 0..spins.len() {
            // Split the overlap into the parts with spin k up (A) and down (B),
            // holding the other phases; e^{−iα/2}A + e^{iα/2}B.
            let bit = reg.bit(spins[idx]);
            let mut rest = alphas.clone();
            rest[idx] = 0.0;
            let d = diag(&rest);
            let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for x in 0..dim {
                if (x >> bit) & 1 == 0 {
                    a += d[x] * w[x];
                } else {
                    b += d[x] * w[x];
                }
            }
            alphas[idx] = if a.norm() > 0.0 && b.norm() > 0.0 {
                a.arg() - b.arg()
            } else {
                0.0
            };
        }
        let now = overlap(&alphas);
        if now <= best + 1e-15 {
            break;
        }
        best = now;
    }
    let d = diag(&alphas);
    let mut du = u.matrix().clone();
    for x in 0..dim {
        for v in &mut du.as_mut_slice()[x * dim..(x + 1) * dim] {
            *v *= d[x];
        }
    }
    Ok((matrix_phase_distance(&du, target.matrix())?, alphas))
}
