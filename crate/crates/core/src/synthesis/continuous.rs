//! Structure enumeration with continuous angle fitting, used to look for a
//! short global Hadamard on a coupled pair.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, PulseOp};
use crate::error::{Error, Result};
use crate::linalg::{phase_distance, CMatrix, Unitary};
use crate::register::{exchange_unitary, single_spin_rotation, Axis, RegisterSpec};

/// Letter of a structure word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Word {
    /// Exchange with a free angle.
    Ex,
    /// z pulse with angles `t·(1, ratio_z)`.
    Z,
    /// x pulse with angles `t·(1, ratio_x)`.
    X,
}

impl Word {
    pub fn symbol(self) -> &'static str {
        match self {
            Word::Ex => "EX",
            Word::Z => "Z",
            Word::X => "X",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousConfig {
    pub depth: usize,
    /// Field amplitude of spin j relative to spin i, per axis.
    pub ratio_z: f64,
    pub ratio_x: f64,
    pub starts: usize,
    pub max_evals: usize,
    pub seed: u64,
    pub success_tol: f64,
    /// Cap on structures × starts.
    pub budget: u128,
    pub workers: Option<usize>,
}

impl Default for ContinuousConfig {
    fn default() -> Self {
        Self {
            depth: 8,
            ratio_z: 0.75,
            ratio_x: 0.5,
            starts: 6,
            max_evals: 4000,
            seed: 0,
            success_tol: 1e-6,
            budget: 1_000_000,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureFit {
    pub word: Vec<Word>,
    pub params: Vec<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousResult {
    /// Best fit per structure, in enumeration order.
    pub fits: Vec<StructureFit>,
    /// Index into `fits` of the overall best.
    pub best: Option<usize>,
    pub success: bool,
}

impl ContinuousResult {
    pub fn best_fit(&self) -> Option<&StructureFit> {
        self.best.map(|k| &self.fits[k])
    }
}

/// Words of length `depth` over {EX, Z, X} without equal neighbours
/// (equal neighbours merge into one step).
pub fn structures(depth: usize) -> Vec<Vec<Word>> {
    let mut out = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &out {
            for l in [Word::Ex, Word::Z, Word::X] {
                if w.last() != Some(&l) {
                    let mut v: Vec<Word> = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        out = next;
    }
    out
}

/// Circuit on two spins for a word and its angles.
pub fn word_circuit(word: &[Word], params: &[f64], cfg: &ContinuousConfig) -> Result<Circuit> {
    let reg = RegisterSpec::new(2)?;
    let ops = word
        .iter()
        .zip(params)
        .map(|(w, &t)| match w {
            Word::Ex => PulseOp::exchange(0, 1, t),
            Word::Z => PulseOp::field(Axis::Z, vec![t, t * cfg.ratio_z]),
            Word::X => PulseOp::field(Axis::X, vec![t, t * cfg.ratio_x]),
        })
        .collect();
    Circuit::from_ops(reg, ops)
}

fn word_unitary(word: &[Word], params: &[f64], cfg: &ContinuousConfig) -> CMatrix {
    let reg = RegisterSpec::new(2).expect("two spins");
    let mut m = CMatrix::identity(4);
    for (w, &t) in word.iter().zip(params) {
        let u = match w {
            Word::Ex => exchange_unitary(&reg, 0, 1, t).expect("pair").into_matrix(),
            Word::Z => crate::linalg::kron(
                &single_spin_rotation(Axis::Z, t),
                &single_spin_rotation(Axis::Z, t * cfg.ratio_z),
            ),
            Word::X => crate::linalg::kron(
                &single_spin_rotation(Axis::X, t),
                &single_spin_rotation(Axis::X, t * cfg.ratio_x),
            ),
        };
        m = u.matmul(&m);
    }
    m
}

/// Minimizes `f` from `x0` with the Nelder–Mead simplex method; returns
/// the best point and value.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    ftol: f64,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    if n == 0 {
        return (Vec::new(), f(x0));
    }
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += step;
        simplex.push(v);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    let mut evals = n + 1;
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.iter().map(|&k| simplex[k].clone()).collect();
        vals = order.iter().map(|&k| vals[k]).collect();
        if vals[n] - vals[0] <= ftol * (vals[0].abs() + ftol) && vals[0] < ftol {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|x| x[d]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|d| centroid[d] + t * (simplex[n][d] - centroid[d]))
                .collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                for k in 1..=n {
                    for d in 0..n {
                        simplex[k][d] = simplex[0][d] + 0.5 * (simplex[k][d] - simplex[0][d]);
                    }
                    vals[k] = f(&simplex[k]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("nonempty");
    (simplex[best].clone(), vals[best])
}

fn fit_structure(word: &[Word], target: &CMatrix, cfg: &ContinuousConfig, seed: u64) -> StructureFit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objective = |x: &[f64]| -> f64 {
        let u = word_unitary(word, x, cfg);
        1.0 - target.adjoint().matmul(&u).trace().norm() / 4.0
    };
    let mut best: (Vec<f64>, f64) = (vec![0.0; word.len()], objective(&vec![0.0; word.len()]));
    for _ in 0..cfg.starts {
        let x0: Vec<f64> = (0..word.len())
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let mut cur = nelder_mead(&mut objective, &x0, 0.5, cfg.max_evals, 1e-15);
        // Restart from the best vertex to shake off a collapsed simplex.
        for step in [0.05, 0.005] {
            let again = nelder_mead(&mut objective, &cur.0, step, cfg.max_evals / 2, 1e-16);
            if again.1 < cur.1 {
                cur = again;
            }
        }
        if cur.1 < best.1 {
            best = cur;
        }
    }
    let u = Unitary::new(word_unitary(word, &best.0, cfg)).expect("product of unitaries");
    let t = Unitary::new(target.clone()).expect("validated target");
    StructureFit {
        word: word.to_vec(),
        distance: phase_distance(&u, &t).expect("same size"),
        params: best.0,
    }
}

/// Fits every structure of the configured depth to `target` (a 4×4
/// unitary on the pair). Success means some structure reaches
/// `success_tol` in phase distance.
pub fn hadamard8_search(target: &Unitary, cfg: &ContinuousConfig) -> Result<ContinuousResult> {
    if target.dim() != 4 {
        return Err(Error::DimensionMismatch(target.dim(), 4));
    }
    let words = structures(cfg.depth);
    let needed = words.len() as u128 * cfg.starts.max(1) as u128;
    if needed > cfg.budget {
        return Err(Error::BudgetExceeded {
            needed,
            cap: cfg.budget,
        });
    }
    let run = || -> Vec<StructureFit> {
        words
            .par_iter()
            .enumerate()
            .map(|(k, w)| fit_structure(w, target.matrix(), cfg, cfg.seed.wrapping_add(k as u64)))
            .collect()
    };
    let fits = match cfg.workers {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidProblem(format!("thread pool: {e}")))?
            .install(run),
    };
    let best = (0..fits.len()).min_by(|&a, &b| fits[a].distance.total_cmp(&fits[b].distance));
    let success = best.is_some_and(|k| fits[k].distance <= cfg.success_tol);
    Ok(ContinuousResult { fits, best, success })
}

/// `H ⊗ H` on two spins.
pub fn hadamard_pair() -> Unitary {
    let s = Complex64::new(0.5f64.sqrt(), 0.0);
    let h = CMatrix::from_rows(&[&[s, s], &[s, -s]]).expect("2x2");
    Unitary::new(crate::linalg::kron(&h, &h)).expect("unitary")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_count() {
        assert_eq!(structures(0).len(), 1);
        assert_eq!(structures(8).len(), 384);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2);
        let (x, v) = nelder_mead(&mut f, &[0.0, 0.0], 0.5, 5000, 1e-20);
        assert!(v < 1e-12 && (x[0] - 1.0).abs() < 1e-5 && (x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn depth_zero_identity() {
        let cfg = ContinuousConfig {
            depth: 0,
            ..Default::default()
        };
        let r = hadamard8_search(&Unitary::identity(4), &cfg).unwrap();
        assert!(r.success);
    }

    #[test]
    fn finds_a_reachable_target() {
        let cfg = ContinuousConfig {
            depth: 3,
            starts: 4,
            ..Default::default()
        };
        let word = [Word::Z, Word::Ex, Word::X];
        let u = Unitary::new(word_unitary(&word, &[0.4, 1.1, -0.8], &cfg)).unwrap();
        let r = hadamard8_search(&u, &cfg).unwrap();
        assert!(r.success, "{:?}", r.best_fit());
    }
}
