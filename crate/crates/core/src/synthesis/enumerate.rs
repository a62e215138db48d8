//! Two-stage exhaustive search.
//!
//! Stage one enumerates the field-pulse subsequence alone and keeps those
//! whose product on a bystander spin matches the target's bystander action
//! (exchange never touches a bystander, so this is exact). Stage two places
//! exchange templates into the remaining slots and evaluates the pair
//! unitary incrementally, rejecting on the first sample that misses.

use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{SynthesisProblem, TargetFamily};
use crate::circuit::{verify_target, GateTarget};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::register::{exchange_unitary, single_spin_rotation, RegisterSpec};
use crate::templates::{Binding, PulseTemplate};

type M2 = [Complex64; 4];
type M4 = [Complex64; 16];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

const ID2: M2 = [ONE, ZERO, ZERO, ONE];
const ID4: M4 = {
    let mut m = [ZERO; 16];
    m[0] = ONE;
    m[5] = ONE;
    m[10] = ONE;
    m[15] = ONE;
    m
};

/// Register used for search samples: pair (0, 1) plus bystander 2.
const SEARCH_SPINS: usize = 3;
const BYSTANDER: usize = 2;
/// Register used for the dense check of every hit.
const VERIFY_SPINS: usize = 4;
const VERIFY_PAIR: (usize, usize) = (1, 2);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    /// Field-only sequences visited in stage one.
    pub field_sequences: u128,
    /// Field sequences that reached stage two.
    pub field_survivors: u128,
    /// Full candidates (field sequence + exchange placement) examined.
    pub candidates: u128,
    /// Candidates never examined because their field sequence was pruned.
    pub pruned: u128,
    /// Hits that failed the dense register check.
    pub rejected_dense: usize,
    /// Templates dropped as phase-equivalent to an earlier one.
    pub merged: Vec<(PulseTemplate, PulseTemplate)>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub sequences: Vec<Vec<PulseTemplate>>,
    /// Worst phase distance over all samples, per sequence.
    pub certificates: Vec<f64>,
    pub stats: SearchStats,
}

fn m2(m: &CMatrix) -> M2 {
    let s = m.as_slice();
    [s[0], s[1], s[2], s[3]]
}

fn m4(m: &CMatrix) -> M4 {
    let mut out = [ZERO; 16];
    out.copy_from_slice(m.as_slice());
    out
}

#[inline]
fn mul2(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Phase distance between `m` and `t` when it is within `tol`, with a
/// cheap overlap test first.
#[inline]
fn close(m: &[Complex64], t: &[Complex64], n: f64, tol: f64) -> Option<f64> {
    let ov: Complex64 = m.iter().zip(t).map(|(a, b)| b.conj() * a).sum();
    let norm = ov.norm();
    if norm / n < 1.0 - 0.5 * tol * tol - 1e-12 {
        return None;
    }
    let c = ov / norm;
    let d = (m.iter().zip(t).map(|(a, b)| (a - c * b).norm_sqr()).sum::<f64>() / n).sqrt();
    (d <= tol).then_some(d)
}

/// A pair pulse in the cheapest form for left multiplication.
#[derive(Clone, Copy)]
enum PairOp {
    /// `diag(g, ·, ·, g)` with the `{|01⟩, |10⟩}` block `[d o; o d]`.
    Exchange { g: Complex64, d: Complex64, o: Complex64 },
    /// `a ⊗ b`.
    Product(M2, M2),
}

impl PairOp {
    #[inline]
    fn apply(&self, m: &M4) -> M4 {
        let mut out = *m;
        match self {
            PairOp::Exchange { g, d, o } => {
                for c in 0..4 {
                    out[c] = g * m[c];
                    out[4 + c] = d * m[4 + c] + o * m[8 + c];
                    out[8 + c] = o * m[4 + c] + d * m[8 + c];
                    out[12 + c] = g * m[12 + c];
                }
            }
            PairOp::Product(a, b) => {
                // Rows are indexed (x_i, x_j); apply b on x_j, then a on x_i.
                let mut t = [ZERO; 16];
                for hi in 0..2 {
                    for c in 0..4 {
                        let (r0, r1) = (m[(2 * hi) * 4 + c], m[(2 * hi + 1) * 4 + c]);
                        t[(2 * hi) * 4 + c] = b[0] * r0 + b[1] * r1;
                        t[(2 * hi + 1) * 4 + c] = b[2] * r0 + b[3] * r1;
                    }
                }
                for lo in 0..2 {
                    for c in 0..4 {
                        let (r0, r1) = (t[lo * 4 + c], t[(2 + lo) * 4 + c]);
                        out[lo * 4 + c] = a[0] * r0 + a[1] * r1;
                        out[(2 + lo) * 4 + c] = a[2] * r0 + a[3] * r1;
                    }
                }
            }
        }
        out
    }
}

/// Per-sample matrices for every template and the target.
struct Tables {
    pair: Vec<Vec<PairOp>>,
    bystander: Vec<Vec<M2>>,
    target_pair: Vec<M4>,
    target_bystander: Vec<M2>,
}

fn build_tables(p: &SynthesisProblem, alphabet: &[PulseTemplate]) -> Result<Tables> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let pair_reg = RegisterSpec::new(2)?;
    let mut t = Tables {
        pair: Vec::new(),
        bystander: Vec::new(),
        target_pair: Vec::new(),
        target_bystander: Vec::new(),
    };
    for _ in 0..p.samples {
        let b = Binding::random(&mut rng, SEARCH_SPINS, 0, 1);
        let mut pair = Vec::with_capacity(alphabet.len());
        let mut bys = Vec::with_capacity(alphabet.len());
        for tpl in alphabet {
            match *tpl {
                PulseTemplate::Exchange { .. } => {
                    let xi = match b.op(tpl)?.kind {
                        crate::circuit::OpKind::Exchange { xi, .. } => xi,
                        _ => unreachable!("exchange template"),
                    };
                    let u = exchange_unitary(&pair_reg, 0, 1, xi)?;
                    let u = u.matrix();
                    pair.push(PairOp::Exchange {
                        g: u[(0, 0)],
                        d: u[(1, 1)],
                        o: u[(1, 2)],
                    });
                    bys.push(ID2);
                }
                PulseTemplate::Field { axis, symbol } => {
                    let a = b.field_angles(axis, symbol)?;
                    let r = |x: f64| single_spin_rotation(axis, x);
                    pair.push(PairOp::Product(m2(&r(a[0])), m2(&r(a[1]))));
                    bys.push(m2(&r(a[BYSTANDER])));
                }
            }
        }
        let (tp, tb) = p.target.factored(&b, BYSTANDER)?;
        t.pair.push(pair);
        t.bystander.push(bys);
        t.target_pair.push(m4(&tp));
        t.target_bystander.push(m2(&tb));
    }
    Ok(t)
}

fn phase_equal(a: &[Complex64], b: &[Complex64], n: f64) -> bool {
    close(a, b, n, 1e-9).is_some()
}

/// Indices of templates that are not phase-equivalent (on every sample) to
/// an earlier template, plus the merged pairs.
fn representatives(alphabet: &[PulseTemplate], t: &Tables) -> (Vec<usize>, Vec<(PulseTemplate, PulseTemplate)>) {
    let mut reps: Vec<usize> = Vec::new();
    let mut merged = Vec::new();
    'outer: for a in 0..alphabet.len() {
        for &r in &reps {
            if alphabet[r].is_exchange() != alphabet[a].is_exchange() {
                continue;
            }
            let same = (0..t.pair.len()).all(|s| {
                phase_equal(&t.pair[s][a].apply(&ID4), &t.pair[s][r].apply(&ID4), 4.0)
                    && phase_equal(&t.bystander[s][a], &t.bystander[s][r], 2.0)
            });
            if same {
                merged.push((alphabet[a], alphabet[r]));
                continue 'outer;
            }
        }
        reps.push(a);
    }
    (reps, merged)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn pow(b: usize, e: usize) -> u128 {
    (0..e).fold(1u128, |acc, _| acc.saturating_mul(b as u128))
}

struct Search<'a> {
    p: &'a SynthesisProblem,
    t: &'a Tables,
    fields: &'a [usize],
    exchanges: &'a [usize],
    n_field: usize,
}

impl Search<'_> {
    fn bystander_ok(&self, seq: &[usize], from_sample: usize) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for s in from_sample..self.p.samples {
            let mut m = ID2;
            for &a in seq {
                m = mul2(&self.t.bystander[s][a], &m);
            }
            worst = worst.max(close(&m, &self.t.target_bystander[s], 2.0, self.p.tolerance)?);
        }
        Some(worst)
    }

    /// Stage one below a fixed prefix: bystander products on sample 0,
    /// extended leaf by leaf.
    fn stage_one(&self, prefix: &mut Vec<usize>, m: M2, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == self.n_field {
            if close(&m, &self.t.target_bystander[0], 2.0, self.p.tolerance).is_some()
                && self.bystander_ok(prefix, 1).is_some()
            {
                out.push(prefix.clone());
            }
            return;
        }
        for &a in self.fields {
            let next = mul2(&self.t.bystander[0][a], &m);
            prefix.push(a);
            self.stage_one(prefix, next, out);
            prefix.pop();
        }
    }

    /// Stage two for one field sequence; returns hits with their worst
    /// pair distance over the samples.
    fn stage_two(&self, fseq: &[usize]) -> Vec<(Vec<usize>, f64)> {
        let mut hits = Vec::new();
        let by = if self.p.prune {
            Some(0.0)
        } else {
            self.bystander_ok(fseq, 0)
        };
        let mut seq = Vec::with_capacity(self.p.slot_count);
        self.place(fseq, 0, self.p.exchange_slots, ID4, &mut seq, &mut |seq: &[usize]| {
            if let Some(bd) = by {
                if let Some(d) = self.pair_ok(seq) {
                    hits.push((seq.to_vec(), d.max(bd)));
                }
            }
        });
        hits
    }

    fn place(
        &self,
        fseq: &[usize],
        fi: usize,
        ex_left: usize,
        m: M4,
        seq: &mut Vec<usize>,
        leaf: &mut dyn FnMut(&[usize]),
    ) {
        if seq.len() == self.p.slot_count {
            if close(&m, &self.t.target_pair[0], 4.0, self.p.tolerance).is_some() {
                leaf(seq);
            }
            return;
        }
        if ex_left > 0 {
            for &e in self.exchanges {
                seq.push(e);
                self.place(fseq, fi, ex_left - 1, self.t.pair[0][e].apply(&m), seq, leaf);
                seq.pop();
            }
        }
        if fi < fseq.len() {
            let a = fseq[fi];
            seq.push(a);
            self.place(fseq, fi + 1, ex_left, self.t.pair[0][a].apply(&m), seq, leaf);
            seq.pop();
        }
    }

    fn pair_ok(&self, seq: &[usize]) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for s in 0..self.p.samples {
            let mut m = ID4;
            for &a in seq {
                m = self.t.pair[s][a].apply(&m);
            }
            worst = worst.max(close(&m, &self.t.target_pair[s], 4.0, self.p.tolerance)?);
        }
        Some(worst)
    }
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidProblem(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Exhaustive search; the returned sequences are sorted by slot-wise
/// alphabet position and do not depend on the worker count.
pub fn enumerate(p: &SynthesisProblem) -> Result<SynthesisResult> {
    p.validate()?;
    let start = Instant::now();
    let tables = build_tables(p, &p.alphabet)?;
    let (reps, merged) = representatives(&p.alphabet, &tables);
    let fields: Vec<usize> = reps.iter().copied().filter(|&a| !p.alphabet[a].is_exchange()).collect();
    let exchanges: Vec<usize> = reps.iter().copied().filter(|&a| p.alphabet[a].is_exchange()).collect();
    let n_field = p.slot_count - p.exchange_slots;
    let field_sequences = pow(fields.len(), n_field);
    let per_field = binomial(p.slot_count, p.exchange_slots) * pow(exchanges.len(), p.exchange_slots);

    let search = Search {
        p,
        t: &tables,
        fields: &fields,
        exchanges: &exchanges,
        n_field,
    };

    let upfront = if p.prune {
        field_sequences
    } else {
        field_sequences.saturating_mul(per_field)
    };
    if upfront > p.budget {
        return Err(Error::BudgetExceeded {
            needed: upfront,
            cap: p.budget,
        });
    }

    let (survivors, hits) = in_pool(p.workers, || -> Result<(u128, Vec<(Vec<usize>, f64)>)> {
        if p.prune {
            // Partition by the first two field letters.
            let depth = n_field.min(2);
            let prefixes: Vec<Vec<usize>> = (0..pow(fields.len(), depth) as usize)
                .map(|mut idx| {
                    let mut v = vec![0; depth];
                    for d in (0..depth).rev() {
                        v[d] = fields[idx % fields.len()];
                        idx /= fields.len();
                    }
                    v
                })
                .collect();
            let kept: Vec<Vec<usize>> = prefixes
                .par_iter()
                .flat_map_iter(|pre| {
                    let mut m = ID2;
                    for &a in pre {
                        m = mul2(&tables.bystander[0][a], &m);
                    }
                    let mut out = Vec::new();
                    search.stage_one(&mut pre.clone(), m, &mut out);
                    out
                })
                .collect();
            let needed = field_sequences + kept.len() as u128 * per_field;
            if needed > p.budget {
                return Err(Error::BudgetExceeded { needed, cap: p.budget });
            }
            let hits = kept.par_iter().flat_map_iter(|f| search.stage_two(f)).collect();
            Ok((kept.len() as u128, hits))
        } else {
            let total = field_sequences as usize;
            let hits = (0..total)
                .into_par_iter()
                .flat_map_iter(|mut idx| {
                    let mut f = vec![0; n_field];
                    for d in (0..n_field).rev() {
                        f[d] = fields[idx % fields.len()];
                        idx /= fields.len();
                    }
                    search.stage_two(&f)
                })
                .collect();
            Ok((field_sequences, hits))
        }
    })??;

    let mut hits = hits;
    hits.sort_by(|a, b| a.0.cmp(&b.0));

    let mut sequences = Vec::new();
    let mut certificates = Vec::new();
    let mut rejected_dense = 0;
    for (seq, d) in hits {
        let tpl: Vec<PulseTemplate> = seq.iter().map(|&a| p.alphabet[a]).collect();
        match dense_check(p, &tpl)? {
            Some(dd) => {
                sequences.push(tpl);
                certificates.push(d.max(dd));
            }
            None => rejected_dense += 1,
        }
    }
    let candidates = survivors * per_field;
    Ok(SynthesisResult {
        sequences,
        certificates,
        stats: SearchStats {
            field_sequences: if p.prune { field_sequences } else { 0 },
            field_survivors: survivors,
            candidates,
            pruned: (field_sequences - survivors) * per_field,
            rejected_dense,
            merged,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

/// Dense check of one hit on a four-spin register with two bystanders.
fn dense_check(p: &SynthesisProblem, seq: &[PulseTemplate]) -> Result<Option<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5eed_0f_d3a5e);
    let mut worst: f64 = 0.0;
    for _ in 0..p.samples {
        let b = Binding::random(&mut rng, VERIFY_SPINS, VERIFY_PAIR.0, VERIFY_PAIR.1);
        let rep = verify_target(&b.circuit(seq)?, &p.target.target(&b)?, p.tolerance)?;
        if !rep.passed {
            return Ok(None);
        }
        worst = worst.max(rep.distance).max(rep.bystander_error);
    }
    Ok(Some(worst))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReverifyEntry {
    pub sequence: Vec<PulseTemplate>,
    pub worst_distance: f64,
    pub worst_bystander: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReverifyReport {
    pub entries: Vec<ReverifyEntry>,
}

impl ReverifyReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

/// Re-checks sequences by dense evaluation on fresh four-spin samples.
pub fn reverify(
    sequences: &[Vec<PulseTemplate>],
    family: TargetFamily,
    tolerance: f64,
    fresh_samples: usize,
    seed: u64,
) -> Result<ReverifyReport> {
    let mut entries = Vec::with_capacity(sequences.len());
    for seq in sequences {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut wd, mut wb) = (0.0f64, 0.0f64);
        let mut passed = true;
        for _ in 0..fresh_samples {
            let b = Binding::random(&mut rng, VERIFY_SPINS, VERIFY_PAIR.0, VERIFY_PAIR.1);
            let target: GateTarget = family.target(&b)?;
            let rep = verify_target(&b.circuit(seq)?, &target, tolerance)?;
            wd = wd.max(rep.distance);
            wb = wb.max(rep.bystander_error);
            passed &= rep.passed;
        }
        entries.push(ReverifyEntry {
            sequence: seq.clone(),
            worst_distance: wd,
            worst_bystander: wb,
            passed,
        });
    }
    Ok(ReverifyReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul4(a: &M4, b: &M4) -> M4 {
        let mut out = [ZERO; 16];
        for r in 0..4 {
            for k in 0..4 {
                let x = a[r * 4 + k];
                for c in 0..4 {
                    out[r * 4 + c] += x * b[k * 4 + c];
                }
            }
        }
        out
    }

    #[test]
    fn pair_ops_match_dense_products() {
        let r = RegisterSpec::new(2).unwrap();
        let x = single_spin_rotation(crate::register::Axis::X, 0.7);
        let z = single_spin_rotation(crate::register::Axis::Z, -1.3);
        let seed = m4(&crate::linalg::kron(&z, &x));
        let dense = m4(&crate::linalg::kron(&x, &z));
        let got = PairOp::Product(m2(&x), m2(&z)).apply(&seed);
        let want = mul4(&dense, &seed);
        assert!(got.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-15));
        let u = exchange_unitary(&r, 0, 1, 0.9).unwrap();
        let e = PairOp::Exchange {
            g: u.matrix()[(0, 0)],
            d: u.matrix()[(1, 1)],
            o: u.matrix()[(1, 2)],
        };
        let want = mul4(&m4(u.matrix()), &seed);
        assert!(e.apply(&seed).iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(11, 4), 330);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(pow(6, 7), 279_936);
    }

    #[test]
    fn close_matches_phase_distance() {
        let a = [ONE, ZERO, ZERO, ONE];
        let i = Complex64::new(0.0, 1.0);
        let b = [i, ZERO, ZERO, i];
        assert_eq!(close(&a, &b, 2.0, 1e-12), Some(0.0));
        let x = [ZERO, ONE, ONE, ZERO];
        assert!(close(&a, &x, 2.0, 1e-3).is_none());
    }
}
