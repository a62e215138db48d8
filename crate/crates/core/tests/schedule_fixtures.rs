//! Golden schedules for the CP circuit and the z rotation block on the
//! bundled device. Set `UPDATE_FIXTURES=1` to rewrite them.

use std::f64::consts::PI;
use std::path::PathBuf;

use globalspin::circuit::text::{parse_circuit, serialize_circuit};
use globalspin::circuit::{cp_circuit_on_device, evaluate, rotation_block, Circuit};
use globalspin::device::{load_preset, register_weights};
use globalspin::scheduler::{
    compile_schedule, parse_schedule, serialize_schedule, simulate_schedule, validate_schedule, CompileOptions,
    DEFAULT_FIELD_CAP,
};
use globalspin::{phase_distance, Axis, Convention, RegisterSpec};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn circuits() -> Vec<(&'static str, Circuit)> {
    let g = load_preset("paper_device").unwrap();
    let reg = RegisterSpec::new(4).unwrap();
    let w = register_weights(&g, 0, 4).unwrap();
    let (cp, _) = cp_circuit_on_device(1, 2, &w, &reg).unwrap();
    let rot = rotation_block(Axis::Z, PI / 2.0, 1, 2, &w, &reg).unwrap();
    vec![("cp_paper", cp), ("rotz_paper", rot)]
}

fn check_or_write(name: &str, text: &str) {
    let path = fixture(name);
    if std::env::var_os("UPDATE_FIXTURES").is_some() {
        std::fs::write(&path, text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(text, golden, "{name} differs from the stored fixture");
}

#[test]
fn schedules_match_fixtures() {
    let g = load_preset("paper_device").unwrap();
    for (name, c) in circuits() {
        check_or_write(&format!("{name}.circuit"), &serialize_circuit(&c));
        let s = compile_schedule(&c, &g, Convention::EstimateFull, &CompileOptions::default()).unwrap();
        let d = phase_distance(&simulate_schedule(&s).unwrap(), &evaluate(&c).unwrap()).unwrap();
        assert!(d <= 1e-8, "{name}: {d}");
        assert!(validate_schedule(&s, &g, DEFAULT_FIELD_CAP).pass());
        check_or_write(&format!("{name}.schedule"), &serialize_schedule(&s));
    }
}

#[test]
fn fixture_circuits_compile_to_fixture_schedules() {
    let g = load_preset("paper_device").unwrap();
    for (name, _) in circuits() {
        let src = std::fs::read_to_string(fixture(&format!("{name}.circuit"))).unwrap();
        let c = parse_circuit(&src, None).unwrap();
        let s = compile_schedule(&c, &g, Convention::EstimateFull, &CompileOptions::default()).unwrap();
        let golden = std::fs::read_to_string(fixture(&format!("{name}.schedule"))).unwrap();
        assert_eq!(serialize_schedule(&s), golden);
        let back = parse_schedule(&golden, load_preset).unwrap();
        assert_eq!(serialize_schedule(&back), golden);
        let d = phase_distance(&simulate_schedule(&back).unwrap(), &evaluate(&c).unwrap()).unwrap();
        assert!(d <= 1e-6, "{name}: {d}");
    }
}
