//! ZXZ Euler decomposition and single-spin gate compilation into rotation
//! blocks.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::builders::rotation_block;
use super::Circuit;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Unitary};
use crate::register::{single_spin_rotation, Axis, RegisterSpec};

/// Angles below this are treated as zero and their block is dropped.
const SKIP_ANGLE: f64 = 1e-12;

/// Per-spin field amplitudes for the z (parallel) and x (antiparallel)
/// current configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldWeights {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
}

impl FieldWeights {
    pub fn check(&self, reg: &RegisterSpec) -> Result<()> {
        for v in [&self.z, &self.x] {
            if v.len() != reg.n_spins() {
                return Err(Error::LengthMismatch {
                    expected: reg.n_spins(),
                    got: v.len(),
                });
            }
            if v.iter().any(|w| !w.is_finite()) {
                return Err(Error::NonFinite("field weight"));
            }
        }
        Ok(())
    }

    /// Zig-zag pattern repeating `(z0, z1)` and `(x0, x1)` along the row.
    pub fn alternating(n: usize, z: (f64, f64), x: (f64, f64)) -> Self {
        let pick = |(a, b): (f64, f64), k: usize| if k % 2 == 0 { a } else { b };
        Self {
            z: (0..n).map(|k| pick(z, k)).collect(),
            x: (0..n).map(|k| pick(x, k)).collect(),
        }
    }
}

/// `U = e^{iδ} Rz(γ) Rx(β) Rz(α)` with `R_a(t) = e^{−it S^a}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phase: f64,
}

impl EulerAngles {
    pub fn matrix(&self) -> CMatrix {
        single_spin_rotation(Axis::Z, self.gamma)
            .matmul(&single_spin_rotation(Axis::X, self.beta))
            .matmul(&single_spin_rotation(Axis::Z, self.alpha))
            .scale(Complex64::from_polar(1.0, self.phase))
    }
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

pub fn euler_zxz(u: &CMatrix) -> Result<EulerAngles> {
    if u.dim() != 2 || !u.is_finite() || u.unitarity_error() > 1e-10 {
        return Err(Error::NotUnitary2x2);
    }
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let v = u.scale(det.sqrt().inv());
    let (a, b, c, d) = (v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]);
    let beta = 2.0 * c.norm().atan2(a.norm());
    // Degenerate β puts the whole z angle into a single block.
    let (alpha, gamma) = if c.norm() < 1e-14 {
        (wrap(d.arg() - a.arg()), 0.0)
    } else if a.norm() < 1e-14 {
        (0.0, wrap(c.arg() - b.arg()))
    } else {
        let (sum, diff) = (d.arg() - a.arg(), c.arg() - b.arg());
        (wrap((sum - diff) / 2.0), wrap((sum + diff) / 2.0))
    };
    // Halving fixes α and γ only modulo π; the other branch flips β's sign.
    let fit = |alpha: f64, gamma: f64| {
        let mut e = EulerAngles {
            alpha,
            beta,
            gamma,
            phase: 0.0,
        };
        let tr = e.matrix().adjoint().matmul(u).trace();
        e.phase = tr.arg();
        (e, 2.0 - tr.norm())
    };
    let (e, miss) = fit(alpha, gamma);
    let (f, miss_f) = fit(wrap(alpha + PI), wrap(gamma + PI));
    Ok(if miss_f < miss { f } else { e })
}

/// Arbitrary single-spin gate on spin i as at most three rotation blocks
/// (z, x, z), using spin j as the exchange partner.
pub fn su2_compile(
    target: &Unitary,
    i: usize,
    j: usize,
    weights: &FieldWeights,
    reg: &RegisterSpec,
) -> Result<Circuit> {
    let e = euler_zxz(target.matrix())?;
    let mut c = Circuit::new(*reg);
    for (axis, angle) in [(Axis::Z, e.alpha), (Axis::X, e.beta), (Axis::Z, e.gamma)] {
        if wrap(angle).abs() > SKIP_ANGLE {
            c = c.concat(&rotation_block(axis, angle, i, j, weights, reg)?)?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{verify_target, Equivalence, GateTarget};
    use crate::linalg::{kron, matrix_phase_distance};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn embed(u: &CMatrix, reg: &RegisterSpec, k: usize) -> Unitary {
        let id = CMatrix::identity(2);
        let mut m = CMatrix::identity(1);
        for q in 0..reg.n_spins() {
            m = kron(&m, if q == k { u } else { &id });
        }
        Unitary::new(m).unwrap()
    }

    #[test]
    fn euler_reconstructs() {
        let s = 0.5f64.sqrt();
        let h = CMatrix::from_rows(&[&[c(s, 0.0), c(s, 0.0)], &[c(s, 0.0), c(-s, 0.0)]]).unwrap();
        let y = CMatrix::from_rows(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, 1.0), c(0.0, 0.0)]]).unwrap();
        for m in [h, y, CMatrix::identity(2), single_spin_rotation(Axis::Z, 0.6)] {
            let e = euler_zxz(&m).unwrap();
            assert!(e.matrix().sub(&m).max_abs() < 1e-12, "{e:?}");
        }
        for (alpha, beta, gamma) in [(0.4, -1.1, 2.3), (0.4, 1.2, 2.3), (-2.0, -0.3, 0.7), (1.0, -2.9, -3.0)] {
            let m = EulerAngles {
                alpha,
                beta,
                gamma,
                phase: 0.5,
            }
            .matrix();
            let e = euler_zxz(&m).unwrap();
            assert!(e.matrix().sub(&m).max_abs() < 1e-12, "{e:?}");
        }
        let e = euler_zxz(&CMatrix::identity(2)).unwrap();
        assert!(e.alpha.abs() < 1e-15 && e.beta.abs() < 1e-15 && e.gamma.abs() < 1e-15);
    }

    #[test]
    fn identity_compiles_to_nothing() {
        let reg = RegisterSpec::new(2).unwrap();
        let w = FieldWeights::alternating(2, (1.0, 0.75), (1.0, 0.5));
        let c = su2_compile(&Unitary::identity(2), 0, 1, &w, &reg).unwrap();
        assert!(c.is_empty());
        let rz = Unitary::new(single_spin_rotation(Axis::Z, 1.1)).unwrap();
        let c = su2_compile(&rz, 0, 1, &w, &reg).unwrap();
        assert_eq!(c.step_count(), 11);
    }

    #[test]
    fn hadamard_three_blocks() {
        let reg = RegisterSpec::new(4).unwrap();
        let w = FieldWeights::alternating(4, (1.0, 0.75), (1.0, 0.5));
        let s = 0.5f64.sqrt();
        let h = CMatrix::from_rows(&[&[c(s, 0.0), c(s, 0.0)], &[c(s, 0.0), c(-s, 0.0)]]).unwrap();
        let circ = su2_compile(&Unitary::new(h.clone()).unwrap(), 2, 3, &w, &reg).unwrap();
        assert_eq!(circ.field_count(), 21);
        let t = GateTarget {
            unitary: embed(&h, &reg, 2),
            acted_spins: vec![2, 3],
            equivalence: Equivalence::UpToGlobalPhase,
        };
        let rep = verify_target(&circ, &t, 1e-8).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(matrix_phase_distance(&h, &h).unwrap() == 0.0);
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(euler_zxz(&CMatrix::zeros(2)).is_err());
        assert!(euler_zxz(&CMatrix::identity(4)).is_err());
    }
}
