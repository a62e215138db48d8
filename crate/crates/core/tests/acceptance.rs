//! One PASS/FAIL line per acceptance criterion. Exits non-zero when any
//! criterion fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use globalspin::circuit::{
    bystander_error, cp_circuit_on_device, evaluate, rotation_block, su2_compile, Circuit, EulerAngles,
};
use globalspin::device::{
    error_budget, field_profile, gate_time_estimate, load_preset, position_sensitivity, pulse_duration,
    register_weights, validate_currents, CurrentConfig, FieldModel,
};
use globalspin::linalg::exact_distance;
use globalspin::register::{
    exchange_unitary, global_field_unitary, spin_operator, xy_exchange_unitary, ZeemanPulseParams,
};
use globalspin::scheduler::{compile_schedule, serialize_schedule, simulate_schedule, CompileOptions};
use globalspin::suite::{run_suite, Check, Suite, SuiteConfig};
use globalspin::synthesis::files::{parse_problem, ProblemFile};
use globalspin::synthesis::{enumerate, hadamard8_search, reverify, SynthesisProblem};
use globalspin::templates::{z_rotation_template, PulseTemplate};
use globalspin::tolerances::{EULER_TOL, IDENTITY_TOL, ROUND_TRIP_TOL};
use globalspin::{hermitian_expm, kron, phase_distance, Axis, CMatrix, Convention, RegisterSpec, Unitary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), globalspin::Error>;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn problem(name: &str) -> ProblemFile {
    let src = std::fs::read_to_string(root().join("problems").join(name)).unwrap();
    parse_problem(&src).unwrap()
}

fn enumerate_problem(name: &str) -> SynthesisProblem {
    match problem(name) {
        ProblemFile::Enumerate(p) => p,
        other => panic!("{name}: not an enumeration problem: {other:?}"),
    }
}

fn failed(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} {:.3e} > {:.0e}", c.name, c.measured, c.threshold))
        .collect()
}

fn identity_suite() -> Outcome {
    let t = Instant::now();
    let cfg = SuiteConfig {
        samples: 1000,
        ..Default::default()
    };
    let checks = run_suite(Suite::All, &cfg)?;
    let secs = t.elapsed().as_secs_f64();
    let bad = failed(&checks);
    let detail = if bad.is_empty() {
        format!("{} checks over 1000 draws, {secs:.1} s", checks.len())
    } else {
        format!(
            "{} of {} checks fail: {}; {secs:.1} s",
            bad.len(),
            checks.len(),
            bad.join(", ")
        )
    };
    Ok((bad.is_empty() && secs < 60.0, detail))
}

fn counts(seq: &[PulseTemplate]) -> (usize, usize) {
    let ex = seq.iter().filter(|t| t.is_exchange()).count();
    (ex, seq.len() - ex)
}

fn search_rotation(name: &str) -> Result<(Vec<Vec<PulseTemplate>>, bool, f64, f64), globalspin::Error> {
    let p = enumerate_problem(name);
    let t = Instant::now();
    let r = enumerate(&p)?;
    let secs = t.elapsed().as_secs_f64();
    let shaped: Vec<Vec<PulseTemplate>> = r
        .sequences
        .into_iter()
        .filter(|s| s.len() == 11 && counts(s) == (4, 7))
        .collect();
    let rv = reverify(&shaped, p.target, p.tolerance, 100, p.seed ^ 0x5eed)?;
    Ok((shaped, rv.all_passed(), secs, p.tolerance))
}

fn box_sequence() -> Outcome {
    let (seqs, verified, secs, tol) = search_rotation("rotation_boxes.problem")?;
    let pass = !seqs.is_empty() && verified && secs < 1800.0;
    Ok((
        pass,
        format!(
            "{} sequences of 11 steps (4 exchange, 7 field) at {tol:.0e}, {secs:.1} s",
            seqs.len()
        ),
    ))
}

fn fused_sequence() -> Outcome {
    let (seqs, verified, secs, _) = search_rotation("rotation_fused.problem")?;
    let template = z_rotation_template();
    let has_template = seqs.contains(&template);
    let detail = format!(
        "{} sequences, reverified {verified}, built-in template among them {has_template}, {secs:.1} s",
        seqs.len()
    );
    Ok((!seqs.is_empty() && verified && has_template, detail))
}

fn device_numbers() -> Outcome {
    let t = Instant::now();
    let g = load_preset("paper_device")?;
    let par = field_profile(&g, CurrentConfig::Parallel, FieldModel::Line)?;
    let anti = field_profile(&g, CurrentConfig::Antiparallel, FieldModel::Line)?;
    let dz = (par.bz[1] - par.bz[0]).abs();
    let dx = (anti.bx[1] - anti.bx[0]).abs();
    let stray = par.bx.iter().chain(&anti.bz).fold(0.0f64, |m, b| m.max(b.abs()));
    let t_fast = pulse_duration(PI, 1.8e-3, 2.0, Convention::EstimateFull)?;
    let t_pi = pulse_duration(PI, dz, 2.0, Convention::EstimateFull)?;
    let area = (dz * 1e3 * t_pi * 1e9 * 10.0).round() / 10.0;
    let mut hot = g.clone();
    for w in &mut hot.wires {
        w.current = 1.0e-3;
    }
    let limit = g.wires[0].current_limit();
    let gate = gate_time_estimate(21, t_pi);
    let budget = error_budget(21, 1e-4)?;
    let tol = position_sensitivity(&g, budget)?.tolerance;
    let checks = [
        Check::near("delta_bz_mT", dz * 1e3, 0.28, 0.05 * 0.28),
        Check::near("delta_bx_mT", dx * 1e3, 0.28, 0.05 * 0.28),
        Check::at_most("stray_T", stray, 1e-15),
        Check::near("pulse_1.8mT_ns", t_fast * 1e9, 10.0, 0.2),
        Check::near("pulse_0.28mT_ns", t_pi * 1e9, 64.0, 0.02 * 64.0),
        Check::within("area_mT_ns", area, 17.9, 18.0),
        Check::at_most("current_0.7mA_fail", !validate_currents(&g).pass() as u8 as f64, 0.0),
        Check::at_least("current_1.0mA_fail", !validate_currents(&hot).pass() as u8 as f64, 1.0),
        Check::near("cap_mA", limit * 1e3, 0.88, 0.005),
        Check::near("gate_us", (gate * 1e8).round() / 100.0, 1.34, 1e-9),
        Check::near("budget", budget, 4.76e-4, 0.005e-4),
        Check::within("position_angstrom", tol * 1e10, 0.5, 2.0),
    ];
    let secs = t.elapsed().as_secs_f64();
    let bad = failed(&checks);
    let detail = format!(
        "dBz {:.4} dBx {:.4} mT, stray {stray:.1e} T, T(pi) {:.2} / {:.2} ns, area {area:.1} mT*ns, cap {:.3} mA, \
         gate {:.3} us, budget {budget:.3e}, position {:.3} A{}",
        dz * 1e3,
        dx * 1e3,
        t_fast * 1e9,
        t_pi * 1e9,
        limit * 1e3,
        gate * 1e6,
        tol * 1e10,
        if bad.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", bad.join(", "))
        }
    );
    Ok((bad.is_empty() && secs < 10.0, detail))
}

fn embed(u: &CMatrix, n: usize, k: usize) -> Unitary {
    let mut m = CMatrix::identity(1);
    for q in 0..n {
        m = kron(&m, &if q == k { u.clone() } else { CMatrix::identity(2) });
    }
    Unitary::new(m).unwrap()
}

fn euler_compilation() -> Outcome {
    let t = Instant::now();
    let g = load_preset("paper_device")?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst2, mut worst4, mut worst_by, mut most_pulses) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for _ in 0..100 {
        // Haar measure on SU(2) in ZXZ angles.
        let e = EulerAngles {
            alpha: rng.gen_range(-PI..PI),
            beta: (1.0 - 2.0 * rng.gen::<f64>()).acos(),
            gamma: rng.gen_range(-PI..PI),
            phase: 0.0,
        };
        let m = e.matrix();
        for n in [2, 4] {
            let reg = RegisterSpec::new(n)?;
            let w = register_weights(&g, 0, n)?;
            let c = su2_compile(&Unitary::new(m.clone())?, 0, 1, &w, &reg)?;
            most_pulses = most_pulses.max(c.field_count());
            let u = evaluate(&c)?;
            let d = phase_distance(&u, &embed(&m, n, 0))?;
            if n == 2 {
                worst2 = worst2.max(d);
            } else {
                worst4 = worst4.max(d);
                worst_by = worst_by.max(bystander_error(&u, &reg, &[0])?);
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = worst2 <= EULER_TOL && worst4 <= EULER_TOL && worst_by <= EULER_TOL && most_pulses <= 21 && secs < 120.0;
    Ok((
        pass,
        format!("worst N=2 {worst2:.1e}, N=4 {worst4:.1e}, bystander {worst_by:.1e}, max {most_pulses} field pulses, {secs:.1} s"),
    ))
}

fn round_trip_scheduling() -> Outcome {
    let t = Instant::now();
    let g = load_preset("paper_device")?;
    let reg = RegisterSpec::new(4)?;
    let w = register_weights(&g, 0, 4)?;
    let (cp, _) = cp_circuit_on_device(1, 2, &w, &reg)?;
    let rot = rotation_block(Axis::Z, PI / 2.0, 1, 2, &w, &reg)?;
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let (mut worst, mut matched) = (0.0f64, 0);
    let cases: [(&str, &Circuit); 2] = [("cp_paper", &cp), ("rotz_paper", &rot)];
    for (name, c) in cases {
        for conv in [Convention::Eq2Half, Convention::EstimateFull] {
            let s = compile_schedule(c, &g, conv, &CompileOptions::default())?;
            worst = worst.max(phase_distance(&simulate_schedule(&s)?, &evaluate(c)?)?);
            if conv == Convention::EstimateFull {
                let golden = std::fs::read_to_string(fixtures.join(format!("{name}.schedule"))).unwrap();
                matched += (serialize_schedule(&s) == golden) as usize;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = worst <= ROUND_TRIP_TOL && matched == 2 && secs < 10.0;
    Ok((
        pass,
        format!("worst distance {worst:.1e}, {matched}/2 fixtures bit-exact, {secs:.2} s"),
    ))
}

fn operator_sum(reg: &RegisterSpec, terms: &[(usize, usize, Axis)]) -> CMatrix {
    let mut h = CMatrix::zeros(reg.dim());
    for &(i, j, a) in terms {
        h = h.add(
            &spin_operator(reg, i, a)
                .unwrap()
                .matmul(&spin_operator(reg, j, a).unwrap()),
        );
    }
    h
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.gen_range(2..=6);
        let reg = RegisterSpec::new(n)?;
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let xi = rng.gen_range(-4.0 * PI..4.0 * PI);
        let heis = operator_sum(&reg, &[(i, j, Axis::X), (i, j, Axis::Y), (i, j, Axis::Z)]);
        worst = worst.max(exact_distance(
            &exchange_unitary(&reg, i, j, xi)?,
            &hermitian_expm(&heis, xi)?,
        )?);
        let xy = operator_sum(&reg, &[(i, j, Axis::X), (i, j, Axis::Y)]);
        worst = worst.max(exact_distance(
            &xy_exchange_unitary(&reg, i, j, xi)?,
            &hermitian_expm(&xy, xi)?,
        )?);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let angles: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0 * PI..4.0 * PI)).collect();
            let mut h = CMatrix::zeros(reg.dim());
            for (k, a) in angles.iter().enumerate() {
                h = h.add(&spin_operator(&reg, k, axis)?.scale(num_complex::Complex64::new(*a, 0.0)));
            }
            let closed = global_field_unitary(&reg, &ZeemanPulseParams::new(axis, angles))?;
            worst = worst.max(exact_distance(&closed, &hermitian_expm(&h, 1.0)?)?);
        }
    }
    let mut agree = 0;
    let mut found = 0;
    for name in ["planted_cp.problem", "planted_swap.problem"] {
        let mut p = enumerate_problem(name);
        p.prune = true;
        let pruned = enumerate(&p)?.sequences;
        p.prune = false;
        let full = enumerate(&p)?.sequences;
        agree += (pruned == full) as usize;
        found += pruned.len();
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = worst <= IDENTITY_TOL && agree == 2 && found > 0 && secs < 120.0;
    Ok((
        pass,
        format!("worst oracle distance {worst:.1e} over 500 instances, pruned = exhaustive on {agree}/2 planted problems ({found} sequences), {secs:.1} s"),
    ))
}

fn hadamard8() -> Outcome {
    let (target, cfg) = match problem("hadamard8.problem") {
        ProblemFile::Continuous { target, config } => (target, config),
        other => panic!("not a continuous problem: {other:?}"),
    };
    let t = Instant::now();
    let a = hadamard8_search(&target.unitary(), &cfg)?;
    let secs = t.elapsed().as_secs_f64();
    let b = hadamard8_search(&target.unitary(), &cfg)?;
    let same = a.fits.len() == b.fits.len()
        && a.fits
            .iter()
            .zip(&b.fits)
            .all(|(x, y)| x.word == y.word && x.distance.to_bits() == y.distance.to_bits() && x.params == y.params)
        && a.best == b.best;
    let outcome = match a.best_fit() {
        Some(f) => {
            let w: Vec<&str> = f.word.iter().map(|w| w.symbol()).collect();
            format!("best {} at {:.2e}", w.join(" "), f.distance)
        }
        None => "no structures".into(),
    };
    Ok((
        same && !a.fits.is_empty(),
        format!(
            "{} structures, success {}, {outcome}, repeat identical {same}, {secs:.1} s per run",
            a.fits.len(),
            a.success
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 identity suite", identity_suite),
        ("2 eleven-step rotation, box alphabet", box_sequence),
        ("2+ eleven-step rotation, fused alphabet", fused_sequence),
        ("3 device numbers", device_numbers),
        ("4 euler compilation", euler_compilation),
        ("5 round-trip scheduling", round_trip_scheduling),
        ("6 oracle equivalence", oracle_equivalence),
        ("7 global hadamard search", hadamard8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut all = true;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        all &= pass;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    if !all {
        std::process::exit(1);
    }
}
