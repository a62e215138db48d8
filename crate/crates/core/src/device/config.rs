//! Geometry files (TOML) and named presets.
//!
//! ```toml
//! name = "paper_device"
//!
//! [[wire]]
//! center_x_nm = 200.0
//! center_z_nm = 100.0
//! width_nm = 200.0
//! height_nm = 200.0
//! current_mA = 0.7
//! jc_A_per_m2 = 2.2e10
//!
//! [[site]]
//! x_nm = 0.0
//! z_nm = 0.0
//! g = 2.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DeviceGeometry, SpinSite, WireSpec};
use crate::error::{Error, Result};

/// Directory searched for `<name>.toml` before the bundled presets.
pub const PRESET_DIR_ENV: &str = "GLOBALSPIN_PRESET_DIR";

const PAPER_DEVICE: &str = include_str!("../../presets/paper_device.toml");

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireFile {
    center_x_nm: f64,
    center_z_nm: f64,
    width_nm: f64,
    height_nm: f64,
    #[serde(rename = "current_mA")]
    current_ma: f64,
    #[serde(rename = "jc_A_per_m2")]
    jc_a_per_m2: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteFile {
    x_nm: f64,
    z_nm: f64,
    #[serde(default = "default_g")]
    g: f64,
    #[serde(default)]
    row: usize,
}

fn default_g() -> f64 {
    2.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    #[serde(default)]
    name: String,
    #[serde(default)]
    wire: Vec<WireFile>,
    #[serde(default)]
    site: Vec<SiteFile>,
}

const NM: f64 = 1e-9;

pub fn parse_geometry(src: &str) -> Result<DeviceGeometry> {
    let f: GeometryFile = toml::from_str(src).map_err(|e| Error::Geometry(e.message().to_string()))?;
    let g = DeviceGeometry {
        name: if f.name.is_empty() { "custom".into() } else { f.name },
        wires: f
            .wire
            .iter()
            .map(|w| WireSpec {
                center: (w.center_x_nm * NM, w.center_z_nm * NM),
                cross_section: (w.width_nm * NM, w.height_nm * NM),
                current: w.current_ma * 1e-3,
                critical_current_density: w.jc_a_per_m2,
            })
            .collect(),
        sites: f
            .site
            .iter()
            .map(|s| SpinSite {
                position: (s.x_nm * NM, s.z_nm * NM),
                g_factor: s.g,
                row_id: s.row,
            })
            .collect(),
    };
    g.validate()?;
    Ok(g)
}

pub fn write_geometry(g: &DeviceGeometry) -> String {
    let f = GeometryFile {
        name: g.name.clone(),
        wire: g
            .wires
            .iter()
            .map(|w| WireFile {
                center_x_nm: w.center.0 / NM,
                center_z_nm: w.center.1 / NM,
                width_nm: w.cross_section.0 / NM,
                height_nm: w.cross_section.1 / NM,
                current_ma: w.current * 1e3,
                jc_a_per_m2: w.critical_current_density,
            })
            .collect(),
        site: g
            .sites
            .iter()
            .map(|s| SiteFile {
                x_nm: s.position.0 / NM,
                z_nm: s.position.1 / NM,
                g: s.g_factor,
                row: s.row_id,
            })
            .collect(),
    };
    toml::to_string(&f).expect("plain data serializes")
}

pub fn load_geometry(path: &Path) -> Result<DeviceGeometry> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Geometry(format!("{}: {e}", path.display())))?;
    parse_geometry(&src)
}

pub fn preset_names() -> Vec<&'static str> {
    vec!["paper_device"]
}

/// Looks up `<name>.toml` in `$GLOBALSPIN_PRESET_DIR`, then the bundled
/// presets.
pub fn load_preset(name: &str) -> Result<DeviceGeometry> {
    if let Some(dir) = std::env::var_os(PRESET_DIR_ENV) {
        let path = PathBuf::from(dir).join(format!("{name}.toml"));
        if path.is_file() {
            return load_geometry(&path);
        }
    }
    match name {
        "paper_device" => parse_geometry(PAPER_DEVICE),
        other => Err(Error::Geometry(format!("unknown preset '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_preset() {
        let g = parse_geometry(PAPER_DEVICE).unwrap();
        assert_eq!(g.wires.len(), 2);
        assert_eq!(g.sites.len(), 6);
        assert!(g.layout_warnings().is_empty());
        assert!((g.wires[0].current_limit() - 0.88e-3).abs() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let g = parse_geometry(PAPER_DEVICE).unwrap();
        let back = parse_geometry(&write_geometry(&g)).unwrap();
        assert_eq!(back.sites.len(), g.sites.len());
        for (a, b) in back.wires.iter().zip(&g.wires) {
            assert!((a.center.0 - b.center.0).abs() < 1e-20 && (a.current - b.current).abs() < 1e-18);
        }
    }

    #[test]
    fn malformed() {
        assert!(parse_geometry("[[wire]]\ncenter_x_nm = 1.0\n").is_err());
        assert!(parse_geometry("bogus = 1\n").is_err());
        let inside = "[[wire]]\ncenter_x_nm=0\ncenter_z_nm=0\nwidth_nm=10\nheight_nm=10\ncurrent_mA=0.1\njc_A_per_m2=1e10\n[[site]]\nx_nm=1\nz_nm=1\n";
        assert!(parse_geometry(inside).is_err());
    }
}
