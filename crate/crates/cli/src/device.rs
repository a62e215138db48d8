use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use globalspin::device::{
    device_constants, error_budget, field_profile, gate_time_estimate, position_sensitivity, pulse_duration,
    validate_currents, CurrentConfig, DeviceGeometry, FieldModel, FieldProfile,
};
use globalspin::suite::Check;
use globalspin::{Axis, Convention};

use crate::report::RunReport;
use crate::{geometry, Context, Failure, Outcome};

#[derive(clap::Args)]
pub struct Args {
    /// Bundled or `$GLOBALSPIN_PRESET_DIR` preset.
    #[arg(long, default_value = "paper_device")]
    preset: String,
    /// Geometry file (TOML); overrides --preset.
    #[arg(long)]
    geometry: Option<PathBuf>,
    /// parallel | antiparallel | custom
    #[arg(long, default_value = "parallel")]
    config: String,
    /// Field pulses per gate for timing and error budget.
    #[arg(long, default_value_t = 21)]
    pulses: usize,
    /// Logical error target for the budget.
    #[arg(long, default_value_t = 1e-4)]
    target_error: f64,
}

fn mt(b: f64) -> f64 {
    b * 1e3
}

fn write_csv(
    path: &Path,
    g: &DeviceGeometry,
    line: &FieldProfile,
    ribbon: Option<&FieldProfile>,
) -> Result<(), Failure> {
    let io = |e: csv::Error| Failure::input(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record([
        "site",
        "x_nm",
        "z_nm",
        "g",
        "bx_line_mT",
        "bz_line_mT",
        "bx_ribbon_mT",
        "bz_ribbon_mT",
    ])
    .map_err(io)?;
    for (k, s) in g.sites.iter().enumerate() {
        let (rx, rz) = ribbon.map_or((String::new(), String::new()), |r| {
            (mt(r.bx[k]).to_string(), mt(r.bz[k]).to_string())
        });
        w.write_record([
            k.to_string(),
            (s.position.0 * 1e9).to_string(),
            (s.position.1 * 1e9).to_string(),
            s.g_factor.to_string(),
            mt(line.bx[k]).to_string(),
            mt(line.bz[k]).to_string(),
            rx,
            rz,
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

pub fn run(a: &Args, ctx: &Context, command: String) -> Result<(RunReport, Outcome), Failure> {
    let config: CurrentConfig = a.config.parse().map_err(Failure::input)?;
    let mut report = RunReport::new(command, ctx.seed);
    let g = geometry(&a.preset, a.geometry.as_deref(), &mut report)?;
    report.info("geometry", g.name.clone());
    report.info("config", config.to_string());
    report.info("wires", g.wires.len());
    report.info("sites", g.sites.len());
    for w in g.layout_warnings() {
        report.info("layout_warning", w);
    }
    let line = field_profile(&g, config, FieldModel::Line)?;
    let ribbon = match field_profile(&g, config, FieldModel::Ribbon) {
        Ok(r) => Some(r),
        Err(e) => {
            report.info("ribbon_model", format!("unavailable: {e}"));
            None
        }
    };
    for (k, s) in g.sites.iter().enumerate() {
        let mut row = format!(
            "x {:.1} nm, z {:.1} nm, line Bx {:.6} mT Bz {:.6} mT",
            s.position.0 * 1e9,
            s.position.1 * 1e9,
            mt(line.bx[k]),
            mt(line.bz[k])
        );
        if let Some(r) = &ribbon {
            row.push_str(&format!(", ribbon Bx {:.6} mT Bz {:.6} mT", mt(r.bx[k]), mt(r.bz[k])));
        }
        report.info(format!("site.{k}"), row);
    }
    let axis = config.axis().unwrap_or_else(|| line.dominant_axis());
    let comp = line.component(axis).expect("x or z");
    report.info("axis", axis.symbol().to_string());
    if let Some(off) = line.component(if axis == Axis::Z { Axis::X } else { Axis::Z }) {
        report.info("off_axis_max_T", off.iter().fold(0.0f64, |m, b| m.max(b.abs())));
    }
    if comp.len() >= 2 {
        let db = (comp[1] - comp[0]).abs();
        report.info("delta_b_01_mT", mt(db));
        if let Some(r) = &ribbon {
            let rc = r.component(axis).expect("x or z");
            let rdb = (rc[1] - rc[0]).abs();
            report.info("delta_b_01_ribbon_mT", mt(rdb));
            report.info("line_vs_ribbon_rel", (db - rdb).abs() / rdb.max(f64::MIN_POSITIVE));
        }
        report.info("max_neighbor_delta_b_mT", mt(line.max_neighbor_gradient(axis)));
        let gf = g.sites[0].g_factor;
        match (
            pulse_duration(PI, db, gf, Convention::Eq2Half),
            pulse_duration(PI, db, gf, Convention::EstimateFull),
        ) {
            (Ok(half), Ok(full)) => {
                report.info("pulse_pi_eq2_half_ns", half * 1e9);
                report.info("pulse_pi_estimate_full_ns", full * 1e9);
                report.info("pulse_area_mT_ns", mt(db) * full * 1e9);
                report.info("gate_time_us", gate_time_estimate(a.pulses, full) * 1e6);
            }
            (Err(e), _) | (_, Err(e)) => report.info("pulse_duration", format!("unavailable: {e}")),
        }
    }
    match device_constants(&line) {
        Ok(c) => {
            let a_k: Vec<String> = c.a.iter().map(|x| format!("{x:.6}")).collect();
            report.info("device_constants", a_k.join(" "));
            report.info("amplitude_mT", mt(c.amplitude));
            let deg = c.neighbor_degeneracies();
            if !deg.is_empty() {
                report.info("degenerate_neighbours", format!("{deg:?}"));
            }
        }
        Err(e) => report.info("device_constants", format!("unavailable: {e}")),
    }
    let budget = error_budget(a.pulses, a.target_error)?;
    report.info("per_pulse_budget", budget);
    match position_sensitivity(&g, budget) {
        Ok(s) => report.info("position_tolerance_angstrom", s.tolerance * 1e10),
        Err(e) => report.info("position_tolerance", format!("unavailable: {e}")),
    }
    for w in validate_currents(&g).wires {
        report.check(Check::at_most(
            format!("current.wire{}", w.index),
            w.current.abs() * 1e3,
            w.limit * 1e3,
        ));
    }
    if let Some(path) = &ctx.csv {
        write_csv(path, &g, &line, ribbon.as_ref())?;
    }
    Ok((
        report,
        Outcome {
            override_code: None,
            csv_checks: false,
        },
    ))
}
