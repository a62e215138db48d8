use std::f64::consts::PI;

use globalspin::circuit::text::{parse_circuit, serialize_circuit};
use globalspin::circuit::{evaluate, rotation_block, su2_compile, Circuit, EulerAngles, PulseOp};
use globalspin::device::{
    field_profile, load_preset, pulse_duration, register_weights, CurrentConfig, DeviceGeometry, FieldModel,
};
use globalspin::linalg::exact_distance;
use globalspin::register::{exchange_unitary, global_field_unitary, swap_matrix, ZeemanPulseParams};
use globalspin::scheduler::{compile_schedule, parse_schedule, serialize_schedule, simulate_schedule, CompileOptions};
use globalspin::{hermitian_expm, kron, phase_distance, Axis, CMatrix, Convention, RegisterSpec, Unitary};
use num_complex::Complex64;
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    -2.0 * PI..2.0 * PI
}

fn hermitian(dim: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        let a = CMatrix::from_fn(dim, |r, c| Complex64::new(v[r * dim + c].0, v[r * dim + c].1));
        a.add(&a.adjoint())
    })
}

fn reg(n: usize) -> RegisterSpec {
    RegisterSpec::new(n).unwrap()
}

fn paper() -> DeviceGeometry {
    load_preset("paper_device").unwrap()
}

fn embed(u: &CMatrix, n: usize, k: usize) -> Unitary {
    let mut m = CMatrix::identity(1);
    for q in 0..n {
        m = kron(&m, &if q == k { u.clone() } else { CMatrix::identity(2) });
    }
    Unitary::new(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expm_is_unitary_and_additive(h in hermitian(4), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let a = hermitian_expm(&h, s).unwrap();
        let b = hermitian_expm(&h, t).unwrap();
        prop_assert!(a.matrix().unitarity_error() < 1e-12);
        let ab = hermitian_expm(&h, s + t).unwrap();
        prop_assert!(exact_distance(&a.mul(&b), &ab).unwrap() < 1e-11);
    }

    #[test]
    fn phase_distance_ignores_global_phase(h in hermitian(4), g in hermitian(4), phi in angle()) {
        let u = hermitian_expm(&h, 1.0).unwrap();
        let v = hermitian_expm(&g, 1.0).unwrap();
        prop_assert!(phase_distance(&u, &u.scale_phase(phi)).unwrap() < 1e-12);
        let d = phase_distance(&u, &v).unwrap();
        prop_assert!((d - phase_distance(&v, &u).unwrap()).abs() < 1e-12);
        prop_assert!((d - phase_distance(&u.scale_phase(phi), &v).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in hermitian(2), b in hermitian(2), c in hermitian(2), d in hermitian(2)) {
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-12);
    }

    #[test]
    fn exchange_composes_and_conserves_total_sz(
        n in 2usize..5, x1 in angle(), x2 in angle(), theta in angle(), pair in (0usize..4, 0usize..4)
    ) {
        let (i, j) = (pair.0 % n, pair.1 % n);
        prop_assume!(i != j);
        let r = reg(n);
        let a = exchange_unitary(&r, i, j, x1).unwrap();
        let b = exchange_unitary(&r, i, j, x2).unwrap();
        let ab = exchange_unitary(&r, i, j, x1 + x2).unwrap();
        prop_assert!(exact_distance(&a.mul(&b), &ab).unwrap() < 1e-11);
        let z = global_field_unitary(&r, &ZeemanPulseParams::new(Axis::Z, vec![theta; n])).unwrap();
        let comm = a.matrix().matmul(z.matrix()).sub(&z.matrix().matmul(a.matrix()));
        prop_assert!(comm.max_abs() < 1e-12);
        let sw = swap_matrix(&r, i, j).unwrap();
        prop_assert!(sw.matmul(&sw).sub(&CMatrix::identity(r.dim())).max_abs() < 1e-15);
    }

    #[test]
    fn circuit_inverse_and_text_round_trip(
        ops in prop::collection::vec((0u8..3, angle(), angle(), angle()), 1..8)
    ) {
        let r = reg(3);
        let ops: Vec<PulseOp> = ops
            .into_iter()
            .map(|(k, a, b, c)| match k {
                0 => PulseOp::exchange(0, 1 + (a > 0.0) as usize, b),
                1 => PulseOp::field(Axis::Z, vec![a, b, c]),
                _ => PulseOp::field(Axis::X, vec![a, b, c]),
            })
            .collect();
        let c = Circuit::from_ops(r, ops).unwrap();
        let inv = Circuit::from_ops(r, c.ops.iter().rev().map(PulseOp::inverse).collect()).unwrap();
        let u = evaluate(&c.concat(&inv).unwrap()).unwrap();
        prop_assert!(exact_distance(&u, &Unitary::identity(8)).unwrap() < 1e-11);
        let back = parse_circuit(&serialize_circuit(&c), Some(3)).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn any_su2_target_compiles(alpha in angle(), beta in angle(), gamma in angle(), n in 2usize..5) {
        let m = EulerAngles { alpha, beta, gamma, phase: 0.0 }.matrix();
        let w = register_weights(&paper(), 0, n).unwrap();
        let c = su2_compile(&Unitary::new(m.clone()).unwrap(), 0, 1, &w, &reg(n)).unwrap();
        prop_assert!(c.field_count() <= 21);
        let d = phase_distance(&evaluate(&c).unwrap(), &embed(&m, n, 0)).unwrap();
        prop_assert!(d < 1e-8, "distance {}", d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fields_scale_with_current(k in 0.1f64..3.0, model in prop::sample::select(vec![FieldModel::Line, FieldModel::Ribbon])) {
        let g = paper();
        let mut h = g.clone();
        for w in &mut h.wires {
            w.current *= k;
        }
        for config in [CurrentConfig::Parallel, CurrentConfig::Antiparallel] {
            let a = field_profile(&g, config, model).unwrap();
            let b = field_profile(&h, config, model).unwrap();
            let peak = a.bx.iter().chain(&a.bz).fold(0.0f64, |m, b| m.max(b.abs()));
            for s in 0..g.sites.len() {
                prop_assert!((b.bx[s] - k * a.bx[s]).abs() <= 1e-12 * k * peak);
                prop_assert!((b.bz[s] - k * a.bz[s]).abs() <= 1e-12 * k * peak);
            }
        }
    }

    #[test]
    fn mirror_symmetric_pair_splits_axes(
        dx in -300.0f64..300.0, x in -250.0f64..150.0, sep in 60.0f64..300.0
    ) {
        // Wires mirrored about z = 0 and sites on z = 0.
        let mut g = paper();
        g.wires[0].center = ((200.0 + dx) * 1e-9, sep * 1e-9);
        g.wires[1].center = ((200.0 + dx) * 1e-9, -sep * 1e-9);
        for w in &mut g.wires {
            w.cross_section = (50e-9, 50e-9);
        }
        g.sites[0].position = (x * 1e-9, 0.0);
        prop_assume!(((200.0 + dx) - x).abs() > 30.0);
        let p = field_profile(&g, CurrentConfig::Parallel, FieldModel::Line).unwrap();
        let a = field_profile(&g, CurrentConfig::Antiparallel, FieldModel::Line).unwrap();
        for s in 0..g.sites.len() {
            prop_assert!(p.bx[s].abs() <= 1e-12 * p.bz[s].abs().max(1e-12));
            prop_assert!(a.bz[s].abs() <= 1e-12 * a.bx[s].abs().max(1e-12));
        }
    }

    #[test]
    fn fields_translate_with_device(shift in -500.0f64..500.0) {
        let g = paper();
        let mut h = g.clone();
        for w in &mut h.wires {
            w.center.0 += shift * 1e-9;
        }
        for s in &mut h.sites {
            s.position.0 += shift * 1e-9;
        }
        let a = field_profile(&g, CurrentConfig::Parallel, FieldModel::Ribbon).unwrap();
        let b = field_profile(&h, CurrentConfig::Parallel, FieldModel::Ribbon).unwrap();
        for s in 0..g.sites.len() {
            prop_assert!((a.bz[s] - b.bz[s]).abs() <= 1e-9 * a.bz[s].abs());
        }
    }

    #[test]
    fn pulse_duration_scaling(theta in 0.01f64..10.0, db in 1e-5f64..1e-2, k in 0.5f64..4.0) {
        for conv in [Convention::Eq2Half, Convention::EstimateFull] {
            let t = pulse_duration(theta, db, 2.0, conv).unwrap();
            prop_assert!(t > 0.0);
            let tk = pulse_duration(k * theta, db, 2.0, conv).unwrap();
            prop_assert!((tk - k * t).abs() <= 1e-12 * tk);
            let tb = pulse_duration(theta, k * db, 2.0, conv).unwrap();
            prop_assert!((tb * k - t).abs() <= 1e-12 * t);
        }
        let half = pulse_duration(theta, db, 2.0, Convention::Eq2Half).unwrap();
        let full = pulse_duration(theta, db, 2.0, Convention::EstimateFull).unwrap();
        prop_assert!((half - 2.0 * full).abs() <= 1e-12 * half);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn schedules_reproduce_circuits(
        blocks in prop::collection::vec((prop::bool::ANY, angle()), 1..3),
        n in 2usize..5,
        full in prop::bool::ANY,
    ) {
        let g = paper();
        let r = reg(n);
        let w = register_weights(&g, 0, n).unwrap();
        let mut c = Circuit::new(r);
        for (z, a) in blocks {
            let axis = if z { Axis::Z } else { Axis::X };
            c = c.concat(&rotation_block(axis, a, 0, 1, &w, &r).unwrap()).unwrap();
        }
        let conv = if full { Convention::EstimateFull } else { Convention::Eq2Half };
        let s = compile_schedule(&c, &g, conv, &CompileOptions::default()).unwrap();
        let again = compile_schedule(&c, &g, conv, &CompileOptions::default()).unwrap();
        prop_assert_eq!(&s, &again);
        let want = evaluate(&c).unwrap();
        prop_assert!(phase_distance(&simulate_schedule(&s).unwrap(), &want).unwrap() < 1e-8);
        let mut end = 0.0f64;
        for e in &s.events {
            prop_assert!(e.duration > 0.0 && e.t_start >= end - 1e-15);
            end = e.end();
        }
        let back = parse_schedule(&serialize_schedule(&s), |_| Ok(g.clone())).unwrap();
        prop_assert_eq!(back.events.len(), s.events.len());
        prop_assert!(phase_distance(&simulate_schedule(&back).unwrap(), &want).unwrap() < 1e-6);
    }
}
