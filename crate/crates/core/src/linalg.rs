//! Dense complex matrices, Hermitian exponentials and phase-insensitive
//! comparison.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::{HERMITIAN_TOL, UNITARITY_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = ONE;
        }
        m
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (k, &v) in entries.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; rejects non-square or
    /// non-finite input.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::MalformedMatrix);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::MalformedMatrix);
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let dim = rows.len();
        let data: Vec<Complex64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::from_row_major(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            let dst = &mut out[r * n..(r + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * n..(k + 1) * n];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    /// Max absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U†U − I|`.
    pub fn unitarity_error(&self) -> f64 {
        self.adjoint().matmul(self).sub(&Self::identity(self.dim)).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Tensor product with `a`'s index major.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (na, nb) = (a.dim, b.dim);
    CMatrix::from_fn(na * nb, |r, c| a[(r / nb, c / nb)] * b[(r % nb, c % nb)])
}

/// A matrix that satisfied the unitarity invariant when it was built.
#[derive(Clone, PartialEq)]
pub struct Unitary(CMatrix);

impl Unitary {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::MalformedMatrix);
        }
        let err = m.unitarity_error();
        if err > UNITARITY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is unitary by construction (products of closed
    /// forms). Debug builds still check.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        debug_assert!(m.unitarity_error() < 1e-9, "untrusted unitary");
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self` followed by `next`, i.e. the matrix `next·self`.
    pub fn then(&self, next: &Unitary) -> Self {
        Self(next.0.matmul(&self.0))
    }

    pub fn mul(&self, rhs: &Unitary) -> Self {
        Self(self.0.matmul(&rhs.0))
    }

    pub fn kron(&self, rhs: &Unitary) -> Self {
        Self(kron(&self.0, &rhs.0))
    }

    pub fn scale_phase(&self, phase: f64) -> Self {
        Self(self.0.scale(Complex64::from_polar(1.0, phase)))
    }
}

impl fmt::Debug for Unitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary {:?}", self.0)
    }
}

/// `exp(−i·scale·h)` through a full Hermitian eigendecomposition.
pub fn hermitian_expm(h: &CMatrix, scale: f64) -> Result<Unitary> {
    if !h.is_finite() || !scale.is_finite() {
        return Err(Error::MalformedMatrix);
    }
    let herm = h.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let eig = SymmetricEigen::new(h.to_nalgebra());
    let n = h.dim;
    let q = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&lam| Complex64::from_polar(1.0, -scale * lam))
        .collect();
    let m = CMatrix::from_fn(n, |r, c| (0..n).map(|k| q[(r, k)] * phases[k] * q[(c, k)].conj()).sum());
    Unitary::new(m)
}

/// Optimal global phase `e^{iφ}` aligning `v` onto `u`, with the overlap
/// `tr(u†v)`.
fn best_phase(u: &CMatrix, v: &CMatrix) -> (Complex64, Complex64) {
    let n = u.dim;
    let mut overlap = ZERO;
    for r in 0..n {
        for c in 0..n {
            overlap += u[(r, c)].conj() * v[(r, c)];
        }
    }
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        ONE
    };
    (phase, overlap)
}

/// Global-phase-invariant distance `sqrt(2 − 2|tr(u†v)|/dim)`.
///
/// Evaluated as `‖u − e^{iφ}v‖_F / √dim` at the optimal φ, which equals
/// the trace formula for unitaries but keeps full precision near zero.
pub fn phase_distance(u: &Unitary, v: &Unitary) -> Result<f64> {
    matrix_phase_distance(&u.0, &v.0)
}

pub(crate) fn matrix_phase_distance(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    if u.dim != v.dim {
        return Err(Error::DimensionMismatch(u.dim, v.dim));
    }
    let (phase, _) = best_phase(u, v);
    let sum: f64 = u
        .data
        .iter()
        .zip(&v.data)
        .map(|(a, b)| (a - phase * b).norm_sqr())
        .sum();
    Ok((sum / u.dim as f64).sqrt())
}

/// The scalar `c` (unit modulus) minimizing `‖u − c·v‖`.
pub fn relative_phase(u: &Unitary, v: &Unitary) -> Result<Complex64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    Ok(best_phase(&u.0, &v.0).0)
}

/// Plain `‖u − v‖_F/√dim` without phase freedom.
pub fn exact_distance(u: &Unitary, v: &Unitary) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    Ok(u.0.sub(&v.0).frobenius_norm() / (u.dim() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_x() -> CMatrix {
        CMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]).unwrap()
    }

    fn sigma_z() -> CMatrix {
        CMatrix::diagonal(&[ONE, -ONE])
    }

    #[test]
    fn kron_identity_and_embedding() {
        assert_eq!(kron(&CMatrix::identity(2), &CMatrix::identity(2)), CMatrix::identity(4));
        let zi = kron(&sigma_z(), &CMatrix::identity(2));
        assert_eq!(zi, CMatrix::diagonal(&[ONE, ONE, -ONE, -ONE]));
    }

    #[test]
    fn kron_is_associative() {
        let a = CMatrix::from_rows(&[&[c(0.3, 0.1), c(-1.0, 0.2)], &[c(0.5, -0.7), c(0.0, 1.1)]]).unwrap();
        let b = CMatrix::from_rows(&[&[c(1.3, 0.0), c(0.2, 0.2)], &[c(-0.4, 0.9), c(0.6, -0.1)]]).unwrap();
        let cc = CMatrix::from_rows(&[&[c(0.0, -0.5), c(2.0, 0.0)], &[c(0.1, 0.1), c(-0.3, 0.8)]]).unwrap();
        let left = kron(&a, &kron(&b, &cc));
        let right = kron(&kron(&a, &b), &cc);
        assert!(left.sub(&right).max_abs() < 1e-15);
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let u = hermitian_expm(&CMatrix::zeros(4), 3.7).unwrap();
        assert!(u.matrix().sub(&CMatrix::identity(4)).max_abs() < 1e-15);
    }

    #[test]
    fn expm_diagonal_case() {
        let h = sigma_z().scale(c(0.5, 0.0));
        let u = hermitian_expm(&h, PI).unwrap();
        let expect = CMatrix::diagonal(&[
            Complex64::from_polar(1.0, -PI / 2.0),
            Complex64::from_polar(1.0, PI / 2.0),
        ]);
        assert!(u.matrix().sub(&expect).max_abs() < 1e-14);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut h = CMatrix::zeros(2);
        h[(0, 1)] = ONE;
        assert!(matches!(hermitian_expm(&h, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn phase_distance_examples() {
        let id = Unitary::identity(2);
        let x = Unitary::new(sigma_x()).unwrap();
        assert_eq!(phase_distance(&id, &id).unwrap(), 0.0);
        assert!((phase_distance(&id, &x).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let shifted = x.scale_phase(1.234);
        assert!(phase_distance(&x, &shifted).unwrap() < 1e-15);
        assert!(matches!(
            phase_distance(&id, &Unitary::identity(4)),
            Err(Error::DimensionMismatch(2, 4))
        ));
    }

    #[test]
    fn stable_distance_matches_trace_formula() {
        // Away from zero the two forms agree to rounding.
        let a = hermitian_expm(&sigma_x(), 0.4).unwrap();
        let b = hermitian_expm(&sigma_z(), 0.9).unwrap();
        let tr = a.matrix().adjoint().matmul(b.matrix()).trace().norm();
        let formula = (2.0 - 2.0 * tr / 2.0f64).max(0.0).sqrt();
        assert!((phase_distance(&a, &b).unwrap() - formula).abs() < 1e-13);
    }

    #[test]
    fn relative_phase_recovers_scalar() {
        let x = Unitary::new(sigma_x()).unwrap();
        let y = x.scale_phase(0.77);
        let p = relative_phase(&y, &x).unwrap();
        assert!((p - Complex64::from_polar(1.0, 0.77)).norm() < 1e-14);
    }
}
