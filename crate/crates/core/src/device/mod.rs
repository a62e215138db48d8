//! Twin-wire zig-zag device: fields at the spin sites, device constants,
//! pulse timing and error budgets.

mod config;
mod field;

pub use config::{load_geometry, load_preset, parse_geometry, preset_names, write_geometry, PRESET_DIR_ENV};
pub use field::{line_field, ribbon_field, Field};

use std::fmt;
use std::str::FromStr;

use crate::circuit::FieldWeights;
use crate::error::{Error, Result};
use crate::register::{Axis, Convention, BOHR_MAGNETON, HBAR};

/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct WireSpec {
    /// (x, z) in meters.
    pub center: (f64, f64),
    /// (width, height) in meters.
    pub cross_section: (f64, f64),
    /// Amperes, positive along +y.
    pub current: f64,
    /// A/m².
    pub critical_current_density: f64,
}

impl WireSpec {
    pub fn area(&self) -> f64 {
        self.cross_section.0 * self.cross_section.1
    }

    pub fn current_limit(&self) -> f64 {
        self.critical_current_density * self.area()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSite {
    /// (x, z) in meters.
    pub position: (f64, f64),
    pub g_factor: f64,
    pub row_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceGeometry {
    pub name: String,
    pub wires: Vec<WireSpec>,
    pub sites: Vec<SpinSite>,
}

impl DeviceGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.wires.is_empty() {
            return Err(Error::Geometry("no wires".into()));
        }
        if self.sites.is_empty() {
            return Err(Error::Geometry("no spin sites".into()));
        }
        for (k, w) in self.wires.iter().enumerate() {
            let vals = [
                w.center.0,
                w.center.1,
                w.cross_section.0,
                w.cross_section.1,
                w.current,
                w.critical_current_density,
            ];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::Geometry(format!("wire {k}: non-finite value")));
            }
            if w.cross_section.0 <= 0.0 || w.cross_section.1 <= 0.0 {
                return Err(Error::Geometry(format!("wire {k}: cross-section must be positive")));
            }
        }
        for (k, s) in self.sites.iter().enumerate() {
            if !(s.position.0.is_finite() && s.position.1.is_finite() && s.g_factor.is_finite()) {
                return Err(Error::Geometry(format!("site {k}: non-finite value")));
            }
            for w in &self.wires {
                let (dx, dz) = (s.position.0 - w.center.0, s.position.1 - w.center.1);
                if dx.abs() < 0.5 * w.cross_section.0 && dz.abs() < 0.5 * w.cross_section.1 {
                    return Err(Error::Geometry(format!("site {k} lies inside a wire")));
                }
            }
        }
        Ok(())
    }

    /// Departures from the two-wire layout the paper-style analysis
    /// assumes; empty for the bundled preset.
    pub fn layout_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.wires.len() != 2 {
            out.push(format!("{} wire(s); the twin-wire layout has 2", self.wires.len()));
        }
        if self.sites.iter().any(|s| s.position.1 != 0.0) {
            out.push("sites off the z = 0 plane".into());
        }
        out
    }

    /// Copy with every wire current set to `amps` in magnitude and the
    /// signs given by `config`.
    pub fn with_config(&self, config: CurrentConfig) -> DeviceGeometry {
        let mut g = self.clone();
        for (k, w) in g.wires.iter_mut().enumerate() {
            let mag = w.current.abs();
            w.current = match config {
                CurrentConfig::Parallel => mag,
                CurrentConfig::Antiparallel if k % 2 == 1 => -mag,
                CurrentConfig::Antiparallel => mag,
                CurrentConfig::Custom => w.current,
            };
        }
        g
    }

    /// Indices of the first `n` sites in `row`; register spin k lives on
    /// the k-th of them.
    pub fn row_sites(&self, row: usize, n: usize) -> Result<Vec<usize>> {
        let sites: Vec<usize> = self
            .sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.row_id == row)
            .map(|(k, _)| k)
            .take(n)
            .collect();
        if sites.len() < n {
            return Err(Error::Geometry(format!(
                "row {row} has {} site(s), need {n}",
                sites.len()
            )));
        }
        Ok(sites)
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }
}

/// Current pattern on the wire pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurrentConfig {
    /// `I₁ = I₂`: z gradient.
    Parallel,
    /// `I₁ = −I₂`: x gradient.
    Antiparallel,
    /// Currents as written in the geometry.
    Custom,
}

impl CurrentConfig {
    pub fn name(self) -> &'static str {
        match self {
            CurrentConfig::Parallel => "parallel",
            CurrentConfig::Antiparallel => "antiparallel",
            CurrentConfig::Custom => "custom",
        }
    }

    /// Field axis this configuration drives.
    pub fn axis(self) -> Option<Axis> {
        match self {
            CurrentConfig::Parallel => Some(Axis::Z),
            CurrentConfig::Antiparallel => Some(Axis::X),
            CurrentConfig::Custom => None,
        }
    }

    pub fn for_axis(axis: Axis) -> Option<Self> {
        match axis {
            Axis::Z => Some(CurrentConfig::Parallel),
            Axis::X => Some(CurrentConfig::Antiparallel),
            Axis::Y => None,
        }
    }
}

impl fmt::Display for CurrentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurrentConfig {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "parallel" => Ok(CurrentConfig::Parallel),
            "antiparallel" => Ok(CurrentConfig::Antiparallel),
            "custom" => Ok(CurrentConfig::Custom),
            other => Err(format!("unknown current configuration '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldModel {
    #[default]
    Line,
    Ribbon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    pub config: CurrentConfig,
    /// Tesla, per site.
    pub bx: Vec<f64>,
    pub bz: Vec<f64>,
}

impl FieldProfile {
    pub fn component(&self, axis: Axis) -> Option<&[f64]> {
        match axis {
            Axis::X => Some(&self.bx),
            Axis::Z => Some(&self.bz),
            Axis::Y => None,
        }
    }

    /// Largest `|B_{k+1} − B_k|` along the row for one component.
    pub fn max_neighbor_gradient(&self, axis: Axis) -> f64 {
        self.component(axis)
            .map(|b| b.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max))
            .unwrap_or(0.0)
    }

    /// Axis carrying the larger field.
    pub fn dominant_axis(&self) -> Axis {
        let mx = self.bx.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mz = self.bz.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if mx > mz {
            Axis::X
        } else {
            Axis::Z
        }
    }
}

/// Field at every site with the wire currents set by `config`.
pub fn field_profile(g: &DeviceGeometry, config: CurrentConfig, model: FieldModel) -> Result<FieldProfile> {
    g.validate()?;
    let g = g.with_config(config);
    let mut bx = Vec::with_capacity(g.sites.len());
    let mut bz = Vec::with_capacity(g.sites.len());
    for s in &g.sites {
        let (mut x, mut z) = (0.0, 0.0);
        for w in &g.wires {
            let f = match model {
                FieldModel::Line => line_field(w, s.position)?,
                FieldModel::Ribbon => ribbon_field(w, s.position)?,
            };
            x += f.0;
            z += f.1;
        }
        bx.push(x);
        bz.push(z);
    }
    Ok(FieldProfile { config, bx, bz })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConstants {
    pub axis: Axis,
    /// `|B_k| / A`.
    pub a: Vec<f64>,
    /// `max_k |B_k|`, tesla.
    pub amplitude: f64,
    /// Sign of `B_k`.
    pub signs: Vec<f64>,
}

impl DeviceConstants {
    /// `(a_i − a_j)/(a_i + a_j)`, the ratio `T′/T`.
    pub fn ratio(&self, i: usize, j: usize) -> f64 {
        (self.a[i] - self.a[j]) / (self.a[i] + self.a[j])
    }

    /// Neighbouring sites whose constants coincide (no usable gradient).
    pub fn neighbor_degeneracies(&self) -> Vec<(usize, usize)> {
        (1..self.a.len())
            .filter(|&k| (self.a[k] - self.a[k - 1]).abs() <= 1e-12)
            .map(|k| (k - 1, k))
            .collect()
    }

    /// Signed per-site weights `sign_k·a_k`.
    pub fn signed(&self) -> Vec<f64> {
        self.a.iter().zip(&self.signs).map(|(a, s)| a * s).collect()
    }
}

/// Device constants along the profile's active axis (x for antiparallel,
/// z otherwise unless x dominates).
pub fn device_constants(fp: &FieldProfile) -> Result<DeviceConstants> {
    let axis = fp.config.axis().unwrap_or_else(|| fp.dominant_axis());
    let b = fp.component(axis).expect("x or z");
    let amplitude = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if amplitude == 0.0 {
        return Err(Error::ZeroFieldSite(0));
    }
    if let Some(k) = b.iter().position(|v| v.abs() <= 1e-12 * amplitude) {
        return Err(Error::ZeroFieldSite(k));
    }
    Ok(DeviceConstants {
        axis,
        a: b.iter().map(|v| v.abs() / amplitude).collect(),
        amplitude,
        signs: b.iter().map(|v| v.signum()).collect(),
    })
}

/// Signed field weights for both axes, for building realizable circuits.
pub fn device_weights(g: &DeviceGeometry) -> Result<FieldWeights> {
    let z = device_constants(&field_profile(g, CurrentConfig::Parallel, FieldModel::Line)?)?;
    let x = device_constants(&field_profile(g, CurrentConfig::Antiparallel, FieldModel::Line)?)?;
    Ok(FieldWeights {
        z: z.signed(),
        x: x.signed(),
    })
}

/// [`device_weights`] restricted to the first `n` sites of `row`.
pub fn register_weights(g: &DeviceGeometry, row: usize, n: usize) -> Result<FieldWeights> {
    let sites = g.row_sites(row, n)?;
    let w = device_weights(g)?;
    Ok(FieldWeights {
        z: sites.iter().map(|&k| w.z[k]).collect(),
        x: sites.iter().map(|&k| w.x[k]).collect(),
    })
}

/// Pulse length giving a Zeeman-angle difference `delta_theta` across a
/// field difference `delta_b`: `T = Δθ·ħ·c/(g μ_B ΔB)` with `c = 2` under
/// the ½ convention and `c = 1` otherwise.
pub fn pulse_duration(delta_theta: f64, delta_b: f64, g: f64, convention: Convention) -> Result<f64> {
    if !(delta_b > 0.0) {
        return Err(Error::NonpositiveGradient(delta_b));
    }
    let c = match convention {
        Convention::Eq2Half => 2.0,
        Convention::EstimateFull => 1.0,
    };
    Ok(delta_theta * HBAR * c / (g * BOHR_MAGNETON * delta_b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireCheck {
    pub index: usize,
    pub current: f64,
    pub limit: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentReport {
    pub wires: Vec<WireCheck>,
}

impl CurrentReport {
    pub fn pass(&self) -> bool {
        self.wires.iter().all(|w| w.pass)
    }
}

/// `|I| ≤ J_c·area` for every wire.
pub fn validate_currents(g: &DeviceGeometry) -> CurrentReport {
    CurrentReport {
        wires: g
            .wires
            .iter()
            .enumerate()
            .map(|(index, w)| {
                let limit = w.current_limit();
                WireCheck {
                    index,
                    current: w.current,
                    limit,
                    margin: limit - w.current.abs(),
                    pass: w.current.abs() <= limit,
                }
            })
            .collect(),
    }
}

/// `sqrt(target)/n`: per-pulse amplitude accuracy when n pulse errors add
/// coherently.
pub fn error_budget(n_pulses: usize, logical_error_target: f64) -> Result<f64> {
    if n_pulses == 0 {
        return Err(Error::InvalidProblem("need at least one pulse".into()));
    }
    Ok(logical_error_target.sqrt() / n_pulses as f64)
}

/// Field-pulse time of a gate; exchange windows are added by the scheduler.
pub fn gate_time_estimate(n_pulses: usize, pulse_t: f64) -> f64 {
    n_pulses as f64 * pulse_t
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sensitivity {
    /// Tesla.
    pub delta_b: f64,
    /// `∂ΔB/∂(wire coordinate)`, T/m, ordered wire by wire as (x, z).
    pub derivatives: Vec<f64>,
    pub max_derivative: f64,
    /// Wire displacement that changes ΔB by the allowed fraction, meters.
    pub tolerance: f64,
}

/// Finite-difference step for wire displacements.
pub const SENSITIVITY_STEP: f64 = 0.01e-9;

/// Tolerance on wire placement: the displacement that changes the first
/// neighbour field difference (parallel configuration, line model) by the
/// fraction `per_pulse_error`.
pub fn position_sensitivity(g: &DeviceGeometry, per_pulse_error: f64) -> Result<Sensitivity> {
    if !(per_pulse_error > 0.0) {
        return Err(Error::InvalidProblem("per-pulse error must be positive".into()));
    }
    if g.sites.len() < 2 {
        return Err(Error::Geometry("need two sites for a gradient".into()));
    }
    let delta = |geo: &DeviceGeometry| -> Result<f64> {
        let fp = field_profile(geo, CurrentConfig::Parallel, FieldModel::Line)?;
        Ok((fp.bz[1] - fp.bz[0]).abs())
    };
    let delta_b = delta(g)?;
    if delta_b == 0.0 {
        return Err(Error::NonpositiveGradient(0.0));
    }
    let h = SENSITIVITY_STEP;
    let mut derivatives = Vec::new();
    for k in 0..g.wires.len() {
        for coord in 0..2 {
            let shifted = |s: f64| {
                let mut geo = g.clone();
                let c = &mut geo.wires[k].center;
                if coord == 0 {
                    c.0 += s;
                } else {
                    c.1 += s;
                }
                geo
            };
            derivatives.push((delta(&shifted(h))? - delta(&shifted(-h))?) / (2.0 * h));
        }
    }
    let max_derivative = derivatives.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    Ok(Sensitivity {
        delta_b,
        tolerance: per_pulse_error / max_derivative * delta_b,
        derivatives,
        max_derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn paper() -> DeviceGeometry {
        load_preset("paper_device").unwrap()
    }

    #[test]
    fn paper_profiles() {
        let g = paper();
        let p = field_profile(&g, CurrentConfig::Parallel, FieldModel::Line).unwrap();
        assert!(p.bx.iter().all(|b| b.abs() <= 1e-15));
        assert!((p.bz[0] - 1.12e-3).abs() < 1e-9 && (p.bz[1] - 0.84e-3).abs() < 1e-9);
        let a = field_profile(&g, CurrentConfig::Antiparallel, FieldModel::Line).unwrap();
        assert!(a.bz.iter().all(|b| b.abs() <= 1e-15));
        assert!((a.bx[0].abs() - 0.56e-3).abs() < 1e-9 && (a.bx[1].abs() - 0.28e-3).abs() < 1e-9);
        let zero = g.with_config(CurrentConfig::Custom);
        let mut zero = zero;
        for w in &mut zero.wires {
            w.current = 0.0;
        }
        let z = field_profile(&zero, CurrentConfig::Custom, FieldModel::Line).unwrap();
        assert!(z.bx.iter().chain(&z.bz).all(|b| *b == 0.0));
    }

    #[test]
    fn constants_and_ratio() {
        let p = field_profile(&paper(), CurrentConfig::Parallel, FieldModel::Line).unwrap();
        let c = device_constants(&p).unwrap();
        assert!((c.a[1] - 0.75).abs() < 1e-12 && (c.a[0] - 1.0).abs() < 1e-15);
        assert!((c.ratio(0, 1) - 1.0 / 7.0).abs() < 1e-12);
        assert!(c.neighbor_degeneracies().is_empty());
        let uniform = FieldProfile {
            config: CurrentConfig::Parallel,
            bx: vec![0.0; 3],
            bz: vec![1e-3; 3],
        };
        assert_eq!(device_constants(&uniform).unwrap().neighbor_degeneracies().len(), 2);
        let zero = FieldProfile {
            config: CurrentConfig::Parallel,
            bx: vec![0.0; 2],
            bz: vec![1e-3, 0.0],
        };
        assert!(matches!(device_constants(&zero), Err(Error::ZeroFieldSite(1))));
    }

    #[test]
    fn durations() {
        let t = pulse_duration(PI, 1.8e-3, 2.0, Convention::EstimateFull).unwrap();
        assert!((t - 9.93e-9).abs() < 0.01e-9, "{t}");
        let t = pulse_duration(PI, 0.28e-3, 2.0, Convention::EstimateFull).unwrap();
        assert!((t - 63.8e-9).abs() < 0.05e-9, "{t}");
        let half = pulse_duration(PI, 0.28e-3, 2.0, Convention::Eq2Half).unwrap();
        assert!((half / t - 2.0).abs() < 1e-12);
        assert_eq!(pulse_duration(0.0, 1e-3, 2.0, Convention::Eq2Half).unwrap(), 0.0);
        assert!(pulse_duration(PI, 0.0, 2.0, Convention::Eq2Half).is_err());
    }

    #[test]
    fn currents_and_budget() {
        let mut g = paper();
        let r = validate_currents(&g);
        assert!(r.pass() && (r.wires[0].margin - 0.18e-3).abs() < 1e-9);
        g.wires[0].current = 1.0e-3;
        assert!(!validate_currents(&g).pass());
        assert!((error_budget(21, 1e-4).unwrap() - 1e-2 / 21.0).abs() < 1e-18);
        assert!((error_budget(42, 1e-4).unwrap() * 2.0 - error_budget(21, 1e-4).unwrap()).abs() < 1e-18);
        assert_eq!(gate_time_estimate(0, 64e-9), 0.0);
    }

    #[test]
    fn sensitivity_is_about_an_angstrom() {
        let s = position_sensitivity(&paper(), 1e-2 / 21.0).unwrap();
        assert!(s.tolerance > 0.5e-10 && s.tolerance < 2.0e-10, "{}", s.tolerance);
        let d = position_sensitivity(&paper(), 2e-2 / 21.0).unwrap();
        assert!((d.tolerance / s.tolerance - 2.0).abs() < 1e-12);
    }
}
