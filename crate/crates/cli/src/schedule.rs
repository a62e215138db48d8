use std::path::PathBuf;

use globalspin::circuit::evaluate;
use globalspin::circuit::text::parse_circuit;
use globalspin::scheduler::{
    compile_schedule, parse_schedule, serialize_schedule, simulate_schedule, validate_schedule, CompileOptions,
    Schedule,
};
use globalspin::suite::Check;
use globalspin::tolerances::ROUND_TRIP_TOL;
use globalspin::{phase_distance, Convention};

use crate::report::{unitary_digest, RunReport};
use crate::{geometry, load_named_geometry, read_input, Context, Failure, Outcome};

/// Default round-trip tolerance when replaying a schedule read from text,
/// whose times carry six decimals of nanoseconds.
const TEXT_ROUND_TRIP_TOL: f64 = 1e-6;

#[derive(clap::Args)]
pub struct Args {
    /// Circuit file, or a schedule file with --simulate-only.
    input: PathBuf,
    /// Bundled or `$GLOBALSPIN_PRESET_DIR` preset.
    #[arg(long, default_value = "paper_device")]
    preset: String,
    /// Geometry file (TOML); overrides --preset.
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// eq2_half | estimate_full
    #[arg(long, default_value = "eq2_half")]
    convention: String,
    /// Register size when the circuit does not pin it.
    #[arg(long)]
    spins: Option<usize>,
    /// Row whose spins the register occupies.
    #[arg(long, default_value_t = 0)]
    row: usize,
    /// Exchange window when an op has no duration hint.
    #[arg(long, default_value_t = 10.0)]
    exchange_ns: f64,
    /// Longest allowed field pulse.
    #[arg(long, default_value_t = 200.0)]
    cap_ns: f64,
    /// Schedule file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replay the input schedule instead of compiling a circuit.
    #[arg(long)]
    simulate_only: bool,
    /// With --simulate-only: circuit to compare the replay against.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Expected unitary digest.
    #[arg(long)]
    expect_digest: Option<String>,
    /// Round-trip tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

fn summarize(report: &mut RunReport, s: &Schedule) {
    report.info("spins", s.register.n_spins());
    report.info("convention", s.convention.name());
    report.info("events", s.events.len());
    report.info("field_events", s.field_events());
    report.info("exchange_events", s.exchange_events());
    report.info("field_time_ns", s.field_time() * 1e9);
    report.info("total_time_ns", s.total_time() * 1e9);
}

fn validate(report: &mut RunReport, s: &Schedule, cap: f64) {
    let v = validate_schedule(s, &s.geometry, cap);
    for x in &v.violations {
        report.info(format!("violation.{}", x.event), format!("{:?}: {}", x.kind, x.detail));
    }
    report.check(Check::at_most("schedule.violations", v.violations.len() as f64, 0.0));
}

pub fn run(a: &Args, ctx: &Context, command: String) -> Result<(RunReport, Outcome), Failure> {
    if !(a.exchange_ns > 0.0 && a.cap_ns > 0.0) {
        return Err(Failure::input("durations must be positive"));
    }
    let mut report = RunReport::new(command, ctx.seed);
    let cap = a.cap_ns * 1e-9;
    if a.simulate_only {
        let src = read_input(&a.input, &mut report)?;
        let file = a.geometry.clone();
        let s = parse_schedule(&src, |name| load_named_geometry(name, file.as_deref()))?;
        summarize(&mut report, &s);
        let u = simulate_schedule(&s)?;
        let digest = unitary_digest(&u);
        report.info("unitary_sha256", digest.clone());
        validate(&mut report, &s, cap);
        if let Some(path) = &a.circuit {
            let csrc = read_input(path, &mut report)?;
            let c = parse_circuit(&csrc, Some(s.register.n_spins()))?;
            let d = phase_distance(&u, &evaluate(&c)?)?;
            report.check(Check::at_most(
                "roundtrip.phase_distance",
                d,
                a.tol.unwrap_or(TEXT_ROUND_TRIP_TOL),
            ));
        }
        if let Some(want) = &a.expect_digest {
            let same = want.trim().eq_ignore_ascii_case(&digest);
            report.check(Check::at_most(
                "unitary_digest.mismatch",
                if same { 0.0 } else { 1.0 },
                0.0,
            ));
        }
        return Ok((report, Outcome::checks()));
    }
    let convention: Convention = a.convention.parse().map_err(Failure::input)?;
    let src = read_input(&a.input, &mut report)?;
    let c = parse_circuit(&src, a.spins)?;
    let g = geometry(&a.preset, a.geometry.as_deref(), &mut report)?;
    report.info("geometry", g.name.clone());
    let opts = CompileOptions {
        active_row: a.row,
        field_cap: cap,
        exchange_duration: a.exchange_ns * 1e-9,
    };
    let s = compile_schedule(&c, &g, convention, &opts)?;
    summarize(&mut report, &s);
    let d = phase_distance(&simulate_schedule(&s)?, &evaluate(&c)?)?;
    report.check(Check::at_most(
        "roundtrip.phase_distance",
        d,
        a.tol.unwrap_or(ROUND_TRIP_TOL),
    ));
    validate(&mut report, &s, cap);
    let text = serialize_schedule(&s);
    let file = a.geometry.clone();
    let back = parse_schedule(&text, |name| {
        if name == g.name {
            Ok(g.clone())
        } else {
            load_named_geometry(name, file.as_deref())
        }
    })?;
    report.info("unitary_sha256", unitary_digest(&simulate_schedule(&back)?));
    if let Some(out) = &a.out {
        std::fs::write(out, &text).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
        report.info("schedule_file", out.display().to_string());
    }
    Ok((report, Outcome::checks()))
}
