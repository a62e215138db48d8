//! Lowering of circuits to timed current and exchange events, and replay
//! of those events back to a unitary.

mod text;

pub use text::{parse_schedule, serialize_schedule};

use num_complex::Complex64;

use crate::circuit::{Circuit, OpKind, PulseOp};
use crate::device::{field_profile, validate_currents, CurrentConfig, DeviceGeometry, FieldModel};
use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, Unitary};
use crate::register::{exchange_unitary, Axis, Convention, RegisterSpec};
use crate::tolerances::REALIZABILITY_RTOL;

/// Exchange window used when an op carries no duration hint.
pub const DEFAULT_EXCHANGE_DURATION: f64 = 10e-9;
/// Longest field pulse the compiler emits.
pub const DEFAULT_FIELD_CAP: f64 = 200e-9;
/// Slack when comparing event boundaries read back from text.
const TIME_SLACK: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Field {
        config: CurrentConfig,
        /// Wire current magnitude, amperes.
        current: f64,
        /// +1 or −1.
        sign: f64,
    },
    Exchange {
        /// Disjoint `(i, j, ξ)` triples, register indices.
        pairs: Vec<(usize, usize, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// Seconds.
    pub t_start: f64,
    /// Seconds.
    pub duration: f64,
    pub payload: Payload,
}

impl Event {
    pub fn end(&self) -> f64 {
        self.t_start + self.duration
    }

    pub fn is_field(&self) -> bool {
        matches!(self.payload, Payload::Field { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub register: RegisterSpec,
    pub geometry: DeviceGeometry,
    pub convention: Convention,
    pub active_row: usize,
    /// Geometry site index of each register spin.
    pub sites: Vec<usize>,
    pub events: Vec<Event>,
}

impl Schedule {
    pub fn total_time(&self) -> f64 {
        self.events.last().map_or(0.0, Event::end)
    }

    pub fn field_time(&self) -> f64 {
        self.events.iter().filter(|e| e.is_field()).map(|e| e.duration).sum()
    }

    pub fn field_events(&self) -> usize {
        self.events.iter().filter(|e| e.is_field()).count()
    }

    pub fn exchange_events(&self) -> usize {
        self.events.len() - self.field_events()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    pub active_row: usize,
    pub field_cap: f64,
    pub exchange_duration: f64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            active_row: 0,
            field_cap: DEFAULT_FIELD_CAP,
            exchange_duration: DEFAULT_EXCHANGE_DURATION,
        }
    }
}

/// `(B^x, B^z)` at the chosen sites with every wire carrying `current` in
/// the pattern of `config`, flipped by `sign`.
fn site_fields(
    g: &DeviceGeometry,
    sites: &[usize],
    config: CurrentConfig,
    current: f64,
    sign: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut g = g.clone();
    for w in &mut g.wires {
        w.current = current;
    }
    let fp = field_profile(&g, config, FieldModel::Line)?;
    Ok(sites.iter().map(|&k| (sign * fp.bx[k], sign * fp.bz[k])).collect())
}

fn drive_current(g: &DeviceGeometry) -> Result<f64> {
    let i = g.wires.iter().fold(0.0f64, |a, w| a.max(w.current.abs()));
    if i == 0.0 {
        return Err(Error::Geometry("no drive current on any wire".into()));
    }
    Ok(i)
}

/// Duration and sign realizing `angles` on `axis`.
fn realize(
    op_index: usize,
    axis: Axis,
    angles: &[f64],
    fields: &[(f64, f64)],
    g: &DeviceGeometry,
    sites: &[usize],
    convention: Convention,
) -> Result<Option<(f64, f64)>> {
    let unrealizable = |reason: String| Error::UnrealizableAngles { op_index, reason };
    let scale = angles.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    if scale == 0.0 {
        return Ok(None);
    }
    let rate = convention.angle_rate();
    let (on, off): (Vec<f64>, Vec<f64>) = fields
        .iter()
        .zip(sites)
        .map(|(&(bx, bz), &k)| {
            let gk = g.sites[k].g_factor;
            match axis {
                Axis::Z => (rate * gk * bz, rate * gk * bx),
                _ => (rate * gk * bx, rate * gk * bz),
            }
        })
        .unzip();
    let norm2: f64 = on.iter().map(|u| u * u).sum();
    if norm2 == 0.0 {
        return Err(unrealizable("field vanishes at every site".into()));
    }
    let t_signed = angles.iter().zip(&on).map(|(a, u)| a * u).sum::<f64>() / norm2;
    let residual = angles
        .iter()
        .zip(&on)
        .fold(0.0f64, |m, (a, u)| m.max((a - t_signed * u).abs()));
    if residual > REALIZABILITY_RTOL * scale {
        return Err(unrealizable(format!(
            "angles are not proportional to the site fields (residual {residual:.3e} rad)"
        )));
    }
    let stray = off.iter().fold(0.0f64, |m, u| m.max((t_signed * u).abs()));
    if stray > REALIZABILITY_RTOL * scale {
        return Err(unrealizable(format!("off-axis field rotates spins by {stray:.3e} rad")));
    }
    Ok(Some((t_signed.abs(), t_signed.signum())))
}

/// Turns each field op into a rectangular current pulse and each run of
/// exchange ops on disjoint pairs into one exchange window, back to back
/// from t = 0.
pub fn compile_schedule(
    c: &Circuit,
    g: &DeviceGeometry,
    convention: Convention,
    opts: &CompileOptions,
) -> Result<Schedule> {
    g.validate()?;
    let n = c.register.n_spins();
    let sites = g.row_sites(opts.active_row, n)?;
    let current = drive_current(g)?;
    let mut events: Vec<Event> = Vec::new();
    let mut t = 0.0;
    let mut open: Option<Event> = None;
    let flush = |open: &mut Option<Event>, events: &mut Vec<Event>, t: &mut f64| {
        if let Some(e) = open.take() {
            *t = e.end();
            events.push(e);
        }
    };
    for (op_index, op) in c.ops.iter().enumerate() {
        match &op.kind {
            OpKind::GlobalField { axis, angles } => {
                flush(&mut open, &mut events, &mut t);
                let config = CurrentConfig::for_axis(*axis).ok_or_else(|| Error::UnrealizableAngles {
                    op_index,
                    reason: "the wires produce no y field".into(),
                })?;
                let fields = site_fields(g, &sites, config, current, 1.0)?;
                let Some((duration, sign)) = realize(op_index, *axis, angles, &fields, g, &sites, convention)? else {
                    continue;
                };
                if duration > opts.field_cap {
                    return Err(Error::DurationCapExceeded {
                        op_index,
                        duration_ns: duration * 1e9,
                        cap_ns: opts.field_cap * 1e9,
                    });
                }
                events.push(Event {
                    t_start: t,
                    duration,
                    payload: Payload::Field { config, current, sign },
                });
                t += duration;
            }
            OpKind::Exchange { i, j, xi } => {
                let duration = op.duration_hint.unwrap_or(opts.exchange_duration);
                if !(duration > 0.0) {
                    return Err(Error::NegativeDuration(duration));
                }
                if let Some(Event {
                    duration: d,
                    payload: Payload::Exchange { pairs },
                    ..
                }) = &mut open
                {
                    let disjoint = pairs.iter().all(|&(a, b, _)| a != *i && a != *j && b != *i && b != *j);
                    if disjoint && *d == duration {
                        pairs.push((*i, *j, *xi));
                        continue;
                    }
                }
                flush(&mut open, &mut events, &mut t);
                open = Some(Event {
                    t_start: t,
                    duration,
                    payload: Payload::Exchange {
                        pairs: vec![(*i, *j, *xi)],
                    },
                });
            }
            OpKind::XYExchange { .. } => {
                return Err(Error::UnrealizableAngles {
                    op_index,
                    reason: "the device provides isotropic exchange only".into(),
                });
            }
        }
    }
    flush(&mut open, &mut events, &mut t);
    Ok(Schedule {
        register: c.register,
        geometry: g.clone(),
        convention,
        active_row: opts.active_row,
        sites,
        events,
    })
}

/// `exp(−iθ n·S)` for a unit vector `n = (nx, 0, nz)`.
fn tilted_rotation(theta: f64, nx: f64, nz: f64) -> CMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let i = Complex64::i();
    let m = [
        Complex64::new(c, 0.0) - i * s * nz,
        -i * s * nx,
        -i * s * nx,
        Complex64::new(c, 0.0) + i * s * nz,
    ];
    CMatrix::from_row_major(2, m.to_vec()).expect("2x2")
}

/// Replays the events through the register: each field event rotates
/// every spin about its local field by the Zeeman angle of the pulse.
pub fn simulate_schedule(s: &Schedule) -> Result<Unitary> {
    let reg = s.register;
    let mut u = CMatrix::identity(reg.dim());
    for e in &s.events {
        match &e.payload {
            Payload::Field { config, current, sign } => {
                let fields = site_fields(&s.geometry, &s.sites, *config, *current, *sign)?;
                let rate = s.convention.angle_rate();
                let mut m = CMatrix::identity(1);
                for (&(bx, bz), &k) in fields.iter().zip(&s.sites) {
                    let b = bx.hypot(bz);
                    let r = if b == 0.0 {
                        CMatrix::identity(2)
                    } else {
                        let theta = rate * s.geometry.sites[k].g_factor * b * e.duration;
                        tilted_rotation(theta, bx / b, bz / b)
                    };
                    m = kron(&m, &r);
                }
                u = m.matmul(&u);
            }
            Payload::Exchange { pairs } => {
                for &(i, j, xi) in pairs {
                    PulseOp::exchange(i, j, xi).apply_left(&reg, &mut u)?;
                }
            }
        }
    }
    Unitary::new(u)
}

/// Same as [`simulate_schedule`] but through dense per-pair exchange
/// matrices; kept as an independent path for tests.
pub fn simulate_schedule_dense(s: &Schedule) -> Result<Unitary> {
    let reg = s.register;
    let mut u = Unitary::identity(reg.dim());
    for e in &s.events {
        match &e.payload {
            Payload::Field { .. } => {
                let single = Schedule {
                    events: vec![Event {
                        t_start: 0.0,
                        ..e.clone()
                    }],
                    ..s.clone()
                };
                u = u.then(&simulate_schedule(&single)?);
            }
            Payload::Exchange { pairs } => {
                for &(i, j, xi) in pairs {
                    u = u.then(&exchange_unitary(&reg, i, j, xi)?);
                }
            }
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    OverlapViolation,
    NonpositiveDuration,
    DurationCap,
    CurrentLimit,
    OverlappingPairs,
    OutsideRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub event: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub violations: Vec<Violation>,
    /// Largest wire current any event draws, amperes.
    pub max_current: f64,
    /// Smallest wire limit `J_c·area`, amperes.
    pub current_limit: f64,
    pub total_time: f64,
}

impl ScheduleReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Itemized hardware checks: sequential events, positive durations, the
/// field-duration cap, wire current limits, disjoint exchange pairs inside
/// the active row.
pub fn validate_schedule(s: &Schedule, g: &DeviceGeometry, field_cap: f64) -> ScheduleReport {
    let mut violations = Vec::new();
    let mut push = |kind, event, detail: String| violations.push(Violation { kind, event, detail });
    let mut max_current = 0.0f64;
    let current_limit = g.wires.iter().map(|w| w.current_limit()).fold(f64::INFINITY, f64::min);
    let mut prev_end = 0.0f64;
    for (k, e) in s.events.iter().enumerate() {
        if !(e.duration > 0.0) {
            push(
                ViolationKind::NonpositiveDuration,
                k,
                format!("duration {:e} s", e.duration),
            );
        }
        if e.t_start + TIME_SLACK < prev_end {
            push(
                ViolationKind::OverlapViolation,
                k,
                format!(
                    "starts at {:.6} ns before the previous event ends at {:.6} ns",
                    e.t_start * 1e9,
                    prev_end * 1e9
                ),
            );
        }
        prev_end = prev_end.max(e.end());
        match &e.payload {
            Payload::Field { current, .. } => {
                max_current = max_current.max(current.abs());
                if e.duration > field_cap {
                    push(
                        ViolationKind::DurationCap,
                        k,
                        format!("{:.6} ns over cap {:.6} ns", e.duration * 1e9, field_cap * 1e9),
                    );
                }
                let mut driven = g.clone();
                for w in &mut driven.wires {
                    w.current = *current;
                }
                let rep = validate_currents(&driven);
                if let Some(w) = rep.wires.iter().find(|w| !w.pass) {
                    push(
                        ViolationKind::CurrentLimit,
                        k,
                        format!("wire {}: {:.6} mA over {:.6} mA", w.index, current * 1e3, w.limit * 1e3),
                    );
                }
            }
            Payload::Exchange { pairs } => {
                let mut seen = vec![false; s.register.n_spins()];
                for &(i, j, _) in pairs {
                    for q in [i, j] {
                        if q >= seen.len() || i == j {
                            push(
                                ViolationKind::OutsideRow,
                                k,
                                format!("pair ({i},{j}) outside the active row"),
                            );
                        } else if seen[q] {
                            push(ViolationKind::OverlappingPairs, k, format!("spin {q} in two pairs"));
                        } else {
                            seen[q] = true;
                        }
                    }
                }
            }
        }
    }
    if s.sites
        .iter()
        .any(|&k| g.sites.get(k).map_or(true, |site| site.row_id != s.active_row))
    {
        push(
            ViolationKind::OutsideRow,
            0,
            format!("register spins leave row {}", s.active_row),
        );
    }
    ScheduleReport {
        violations,
        max_current,
        current_limit,
        total_time: s.total_time(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{cp_circuit_on_device, evaluate, rotation_block};
    use crate::device::{load_preset, register_weights};
    use crate::linalg::phase_distance;
    use std::f64::consts::PI;

    fn paper() -> DeviceGeometry {
        load_preset("paper_device").unwrap()
    }

    fn reg(n: usize) -> RegisterSpec {
        RegisterSpec::new(n).unwrap()
    }

    fn compile(c: &Circuit, conv: Convention) -> Result<Schedule> {
        compile_schedule(c, &paper(), conv, &CompileOptions::default())
    }

    #[test]
    fn empty() {
        let s = compile(&Circuit::new(reg(2)), Convention::EstimateFull).unwrap();
        assert!(s.events.is_empty());
        assert!(phase_distance(&simulate_schedule(&s).unwrap(), &Unitary::identity(4)).unwrap() < 1e-15);
        assert!(validate_schedule(&s, &paper(), DEFAULT_FIELD_CAP).pass());
    }

    #[test]
    fn single_pulse_length() {
        let w = register_weights(&paper(), 0, 2).unwrap();
        let lambda = PI / (w.z[0] - w.z[1]);
        let angles: Vec<f64> = w.z[..2].iter().map(|a| lambda * a).collect();
        let c = Circuit::from_ops(reg(2), vec![PulseOp::field(Axis::Z, angles)]).unwrap();
        let s = compile(&c, Convention::EstimateFull).unwrap();
        assert_eq!(s.events.len(), 1);
        assert!(
            (s.events[0].duration - 63.8e-9).abs() < 0.1e-9,
            "{}",
            s.events[0].duration
        );
        let half = compile(&c, Convention::Eq2Half).unwrap();
        assert!((half.events[0].duration / s.events[0].duration - 2.0).abs() < 1e-12);
        let rt = phase_distance(&simulate_schedule(&s).unwrap(), &evaluate(&c).unwrap()).unwrap();
        assert!(rt < 1e-8, "{rt}");
    }

    #[test]
    fn doubling_duration_doubles_angles() {
        let w = register_weights(&paper(), 0, 2).unwrap();
        let angles: Vec<f64> = w.z[..2].iter().map(|a| 0.7 * a).collect();
        let c = Circuit::from_ops(reg(2), vec![PulseOp::field(Axis::Z, angles.clone())]).unwrap();
        let mut s = compile(&c, Convention::EstimateFull).unwrap();
        s.events[0].duration *= 2.0;
        let doubled: Vec<f64> = angles.iter().map(|a| 2.0 * a).collect();
        let d = Circuit::from_ops(reg(2), vec![PulseOp::field(Axis::Z, doubled)]).unwrap();
        assert!(phase_distance(&simulate_schedule(&s).unwrap(), &evaluate(&d).unwrap()).unwrap() < 1e-8);
    }

    #[test]
    fn cp_and_rotation_round_trip() {
        let g = paper();
        let w = register_weights(&g, 0, 4).unwrap();
        let r = reg(4);
        let (cp, _) = cp_circuit_on_device(1, 2, &w, &r).unwrap();
        let rot = rotation_block(Axis::Z, PI / 2.0, 1, 2, &w, &r).unwrap();
        let rotx = rotation_block(Axis::X, -0.9, 0, 1, &w, &r).unwrap();
        for conv in [Convention::Eq2Half, Convention::EstimateFull] {
            for c in [&cp, &rot, &rotx] {
                let s = compile(c, conv).unwrap();
                let u = evaluate(c).unwrap();
                let d = phase_distance(&simulate_schedule(&s).unwrap(), &u).unwrap();
                assert!(d < 1e-8, "{conv:?} {d}");
                assert!(phase_distance(&simulate_schedule_dense(&s).unwrap(), &u).unwrap() < 1e-8);
                assert!(validate_schedule(&s, &g, DEFAULT_FIELD_CAP).pass());
            }
        }
        let s = compile(&rot, Convention::EstimateFull).unwrap();
        assert_eq!((s.field_events(), s.exchange_events()), (7, 4));
        assert!(s.events.iter().filter(|e| e.is_field()).all(|e| e.duration <= 64.3e-9));
    }

    #[test]
    fn unrealizable_and_cap() {
        let bad = Circuit::from_ops(
            reg(2),
            vec![PulseOp::exchange(0, 1, 1.0), PulseOp::field(Axis::Z, vec![0.3, 0.3])],
        )
        .unwrap();
        assert!(matches!(
            compile(&bad, Convention::EstimateFull),
            Err(Error::UnrealizableAngles { op_index: 1, .. })
        ));
        let y = Circuit::from_ops(reg(2), vec![PulseOp::field(Axis::Y, vec![0.3, 0.2])]).unwrap();
        assert!(matches!(
            compile(&y, Convention::EstimateFull),
            Err(Error::UnrealizableAngles { op_index: 0, .. })
        ));
        let w = register_weights(&paper(), 0, 2).unwrap();
        let big: Vec<f64> = w.z[..2].iter().map(|a| 40.0 * a).collect();
        let c = Circuit::from_ops(reg(2), vec![PulseOp::field(Axis::Z, big)]).unwrap();
        assert!(matches!(
            compile(&c, Convention::EstimateFull),
            Err(Error::DurationCapExceeded { op_index: 0, .. })
        ));
    }

    #[test]
    fn exchange_merging() {
        let c = Circuit::from_ops(
            reg(4),
            vec![
                PulseOp::exchange(0, 1, PI),
                PulseOp::exchange(2, 3, 0.5),
                PulseOp::exchange(1, 2, 1.0),
            ],
        )
        .unwrap();
        let s = compile(&c, Convention::EstimateFull).unwrap();
        assert_eq!(s.events.len(), 2);
        assert!((s.total_time() - 20e-9).abs() < 1e-18);
        assert!(phase_distance(&simulate_schedule(&s).unwrap(), &evaluate(&c).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn validation_failures() {
        let g = paper();
        let w = register_weights(&g, 0, 2).unwrap();
        let (cp, _) = cp_circuit_on_device(0, 1, &w, &reg(2)).unwrap();
        let mut s = compile(&cp, Convention::EstimateFull).unwrap();
        s.events[1].t_start -= 1e-9;
        assert!(validate_schedule(&s, &g, DEFAULT_FIELD_CAP).has(ViolationKind::OverlapViolation));
        let mut s = compile(&cp, Convention::EstimateFull).unwrap();
        if let Payload::Field { current, .. } = &mut s.events[0].payload {
            *current = 1.0e-3;
        }
        let rep = validate_schedule(&s, &g, DEFAULT_FIELD_CAP);
        assert!(rep.has(ViolationKind::CurrentLimit) && !rep.has(ViolationKind::OverlapViolation));
        let mut s = compile(&cp, Convention::EstimateFull).unwrap();
        let ex = s.events.iter().position(|e| !e.is_field()).unwrap();
        s.events[ex].payload = Payload::Exchange {
            pairs: vec![(0, 1, PI), (1, 0, PI)],
        };
        assert!(validate_schedule(&s, &g, DEFAULT_FIELD_CAP).has(ViolationKind::OverlappingPairs));
    }
}
