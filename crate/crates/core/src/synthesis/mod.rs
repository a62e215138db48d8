//! Search over pulse-template sequences for circuits that realize a target
//! gate family, and continuous-angle search for short global Hadamards.

mod continuous;
mod enumerate;
pub mod files;

pub use continuous::{
    hadamard8_search, hadamard_pair, nelder_mead, structures, word_circuit, ContinuousConfig, ContinuousResult,
    StructureFit, Word,
};
pub use enumerate::{enumerate, reverify, ReverifyEntry, ReverifyReport, SearchStats, SynthesisResult};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::circuit::{zz_phase, Equivalence, GateTarget, PulseOp};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix};
use crate::register::{single_spin_rotation, Axis, RegisterSpec};
use crate::templates::{box_alphabet, fused_alphabet, Binding, PulseTemplate, Symbol};

/// Gate family a search looks for, parameterized by the sampled binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetFamily {
    /// `e^{−i2(θ_i−θ_j)S_i^z}` on spin i, identity elsewhere.
    ZRotation,
    /// Same with S^x and the x-axis θ.
    XRotation,
    /// `V^z` with the θ entries of i and j exchanged; bystanders keep θ_k.
    SwapConjugation,
    /// `e^{−iπS_i^zS_j^z}`.
    Cp,
    /// The bound pulse itself.
    FieldPulse(Axis, Symbol),
    Identity,
}

impl fmt::Display for TargetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetFamily::ZRotation => write!(f, "z_rotation"),
            TargetFamily::XRotation => write!(f, "x_rotation"),
            TargetFamily::SwapConjugation => write!(f, "swap_conjugation"),
            TargetFamily::Cp => write!(f, "cp"),
            TargetFamily::FieldPulse(axis, symbol) => {
                write!(f, "pulse:{}", PulseTemplate::field(*axis, *symbol))
            }
            TargetFamily::Identity => write!(f, "identity"),
        }
    }
}

impl FromStr for TargetFamily {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "z_rotation" => TargetFamily::ZRotation,
            "x_rotation" => TargetFamily::XRotation,
            "swap_conjugation" => TargetFamily::SwapConjugation,
            "cp" => TargetFamily::Cp,
            "identity" => TargetFamily::Identity,
            _ => match s.strip_prefix("pulse:").map(str::parse::<PulseTemplate>) {
                Some(Ok(PulseTemplate::Field { axis, symbol })) => TargetFamily::FieldPulse(axis, symbol),
                _ => return Err(format!("unknown target family '{s}'")),
            },
        })
    }
}

fn rot(axis: Axis, a: f64) -> CMatrix {
    single_spin_rotation(axis, a)
}

impl TargetFamily {
    /// Target on the pair (i, j) as a 4×4 matrix and the expected action on
    /// bystander spin `k`.
    pub fn factored(&self, b: &Binding, k: usize) -> Result<(CMatrix, CMatrix)> {
        let (i, j) = (b.i, b.j);
        let id = CMatrix::identity(2);
        Ok(match *self {
            TargetFamily::ZRotation => (kron(&rot(Axis::Z, 2.0 * b.z.delta(i, j)), &id), id),
            TargetFamily::XRotation => (kron(&rot(Axis::X, 2.0 * b.x.delta(i, j)), &id), id),
            TargetFamily::SwapConjugation => {
                let t = &b.z.theta;
                (kron(&rot(Axis::Z, t[j]), &rot(Axis::Z, t[i])), rot(Axis::Z, t[k]))
            }
            TargetFamily::Cp => {
                let r = RegisterSpec::new(2)?;
                (zz_phase(&r, 0, 1, PI)?.into_matrix(), id)
            }
            TargetFamily::FieldPulse(axis, symbol) => {
                let a = b.field_angles(axis, symbol)?;
                (kron(&rot(axis, a[i]), &rot(axis, a[j])), rot(axis, a[k]))
            }
            TargetFamily::Identity => (CMatrix::identity(4), id),
        })
    }

    /// Target on the binding's full register.
    pub fn target(&self, b: &Binding) -> Result<GateTarget> {
        let reg = RegisterSpec::new(b.n_spins)?;
        let (i, j) = (b.i, b.j);
        let only_i = |a: f64| {
            let mut v = vec![0.0; b.n_spins];
            v[i] = a;
            v
        };
        let pair = vec![i, j];
        let all: Vec<usize> = (0..b.n_spins).collect();
        let (unitary, acted) = match *self {
            TargetFamily::ZRotation => (
                PulseOp::field(Axis::Z, only_i(2.0 * b.z.delta(i, j))).unitary(&reg)?,
                pair,
            ),
            TargetFamily::XRotation => (
                PulseOp::field(Axis::X, only_i(2.0 * b.x.delta(i, j))).unitary(&reg)?,
                pair,
            ),
            TargetFamily::SwapConjugation => {
                let mut a = b.z.theta.clone();
                a.swap(i, j);
                (PulseOp::field(Axis::Z, a).unitary(&reg)?, all)
            }
            TargetFamily::Cp => (zz_phase(&reg, i, j, PI)?, pair),
            TargetFamily::FieldPulse(axis, symbol) => {
                (PulseOp::field(axis, b.field_angles(axis, symbol)?).unitary(&reg)?, all)
            }
            TargetFamily::Identity => (crate::linalg::Unitary::identity(reg.dim()), pair),
        };
        Ok(GateTarget {
            unitary,
            acted_spins: acted,
            equivalence: Equivalence::UpToGlobalPhase,
        })
    }
}

/// Discrete search problem over template sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisProblem {
    pub slot_count: usize,
    pub exchange_slots: usize,
    pub alphabet: Vec<PulseTemplate>,
    pub target: TargetFamily,
    pub samples: usize,
    pub tolerance: f64,
    /// Cap on stage-one leaves plus full candidates.
    pub budget: u128,
    pub seed: u64,
    /// Reject field sequences whose bystander action is wrong before
    /// placing exchanges.
    pub prune: bool,
    pub workers: Option<usize>,
}

pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

impl SynthesisProblem {
    pub fn new(slot_count: usize, exchange_slots: usize, alphabet: Vec<PulseTemplate>, target: TargetFamily) -> Self {
        Self {
            slot_count,
            exchange_slots,
            alphabet,
            target,
            samples: 20,
            tolerance: 1e-10,
            budget: DEFAULT_BUDGET,
            seed: 0,
            prune: true,
            workers: None,
        }
    }

    /// Eleven slots, four swaps, seven field pulses from the box
    /// vocabulary, targeting the z rotation on spin i.
    pub fn rotation_boxes() -> Self {
        Self::new(11, 4, box_alphabet(), TargetFamily::ZRotation)
    }

    /// As [`Self::rotation_boxes`] with fused θ±φ pulses allowed.
    pub fn rotation_fused() -> Self {
        let mut p = Self::new(11, 4, fused_alphabet(), TargetFamily::ZRotation);
        p.budget = 4_000_000_000;
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphabet.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if self.exchange_slots > self.slot_count {
            return Err(Error::InvalidProblem("more exchange slots than slots".into()));
        }
        let ex = self.alphabet.iter().filter(|t| t.is_exchange()).count();
        let fi = self.alphabet.len() - ex;
        if self.exchange_slots > 0 && ex == 0 {
            return Err(Error::InvalidProblem("exchange slots but no exchange template".into()));
        }
        if self.slot_count > self.exchange_slots && fi == 0 {
            return Err(Error::InvalidProblem("field slots but no field template".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidProblem("need at least one sample".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidProblem("tolerance must be positive".into()));
        }
        for t in &self.alphabet {
            if let PulseTemplate::Field { axis: Axis::Y, .. } = t {
                return Err(Error::InvalidProblem("y-axis templates are not supported".into()));
            }
        }
        Ok(())
    }
}
