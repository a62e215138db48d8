//! Magnetostatics of long straight wires.

use std::sync::OnceLock;

use super::{WireSpec, MU0};
use crate::error::{Error, Result};

/// `(B^x, B^z)` in tesla.
pub type Field = (f64, f64);

fn inside(w: &WireSpec, p: (f64, f64)) -> bool {
    let (dx, dz) = (p.0 - w.center.0, p.1 - w.center.1);
    dx.abs() < 0.5 * w.cross_section.0 && dz.abs() < 0.5 * w.cross_section.1
}

/// Field of a current `current` along +y through `center`.
fn filament(current: f64, center: (f64, f64), p: (f64, f64)) -> Field {
    let (dx, dz) = (p.0 - center.0, p.1 - center.1);
    let r2 = dx * dx + dz * dz;
    let k = MU0 * current / (2.0 * std::f64::consts::PI * r2);
    (k * dz, -k * dx)
}

/// Infinite thin wire at the cross-section center.
pub fn line_field(w: &WireSpec, p: (f64, f64)) -> Result<Field> {
    if inside(w, p) || (p.0 == w.center.0 && p.1 == w.center.1) {
        return Err(Error::PointInsideWire);
    }
    Ok(filament(w.current, w.center, p))
}

const GL_ORDER: usize = 8;

/// Gauss–Legendre nodes and weights on [−1, 1].
fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut x = [0.0; GL_ORDER];
        let mut w = [0.0; GL_ORDER];
        for k in 0..n {
            let mut t = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for m in 2..=n {
                    let p2 = ((2 * m - 1) as f64 * t * p1 - (m - 1) as f64 * p0) / m as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
                let dt = p1 / dp;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            x[k] = t;
            w[k] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        (x, w)
    })
}

fn rect_rule(current_density: f64, rect: [f64; 4], p: (f64, f64)) -> Field {
    let (xs, ws) = gauss_legendre();
    let [x0, x1, z0, z1] = rect;
    let (hx, hz) = (0.5 * (x1 - x0), 0.5 * (z1 - z0));
    let (cx, cz) = (0.5 * (x0 + x1), 0.5 * (z0 + z1));
    let (mut bx, mut bz) = (0.0, 0.0);
    for (a, wa) in xs.iter().zip(ws) {
        for (b, wb) in xs.iter().zip(ws) {
            let f = filament(1.0, (cx + hx * a, cz + hz * b), p);
            bx += wa * wb * f.0;
            bz += wa * wb * f.1;
        }
    }
    let s = current_density * hx * hz;
    (s * bx, s * bz)
}

fn adapt(j: f64, rect: [f64; 4], p: (f64, f64), whole: Field, tol: f64, depth: usize) -> Result<Field> {
    let [x0, x1, z0, z1] = rect;
    let (xm, zm) = (0.5 * (x0 + x1), 0.5 * (z0 + z1));
    let quads = [[x0, xm, z0, zm], [xm, x1, z0, zm], [x0, xm, zm, z1], [xm, x1, zm, z1]];
    let parts: Vec<Field> = quads.iter().map(|q| rect_rule(j, *q, p)).collect();
    let sum = parts.iter().fold((0.0, 0.0), |a, f| (a.0 + f.0, a.1 + f.1));
    let err = (sum.0 - whole.0).abs().max((sum.1 - whole.1).abs());
    if err <= tol {
        return Ok(sum);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure);
    }
    let mut acc = (0.0, 0.0);
    for (q, f) in quads.iter().zip(parts) {
        let r = adapt(j, *q, p, f, tol / 4.0, depth - 1)?;
        acc = (acc.0 + r.0, acc.1 + r.1);
    }
    Ok(acc)
}

/// Uniform current density over the rectangular cross-section, integrated
/// adaptively to relative error 1e-6 (relative to the line estimate).
pub fn ribbon_field(w: &WireSpec, p: (f64, f64)) -> Result<Field> {
    if inside(w, p) {
        return Err(Error::PointInsideWire);
    }
    let (width, height) = w.cross_section;
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::Geometry("cross-section must be positive".into()));
    }
    if w.current == 0.0 {
        return Ok((0.0, 0.0));
    }
    let j = w.current / (width * height);
    let rect = [
        w.center.0 - 0.5 * width,
        w.center.0 + 0.5 * width,
        w.center.1 - 0.5 * height,
        w.center.1 + 0.5 * height,
    ];
    let scale = {
        let f = filament(w.current, w.center, p);
        f.0.hypot(f.1)
    };
    let whole = rect_rule(j, rect, p);
    adapt(j, rect, p, whole, 1e-7 * scale, 24)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wire(current: f64) -> WireSpec {
        WireSpec {
            center: (200e-9, 100e-9),
            cross_section: (200e-9, 200e-9),
            current,
            critical_current_density: 2.2e10,
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre();
        let s: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn line_magnitude() {
        let f = line_field(&wire(0.7e-3), (0.0, 0.0)).unwrap();
        let mag = f.0.hypot(f.1);
        assert!((mag - 0.6261e-3).abs() < 1e-7, "{mag}");
        let g = line_field(&wire(-0.7e-3), (0.0, 0.0)).unwrap();
        assert_eq!((g.0, g.1), (-f.0, -f.1));
        assert_eq!(line_field(&wire(0.0), (0.0, 0.0)).unwrap(), (0.0, 0.0));
        assert!(matches!(
            line_field(&wire(1e-3), (210e-9, 90e-9)),
            Err(Error::PointInsideWire)
        ));
    }

    #[test]
    fn ribbon_near_line_far_away() {
        let mut w = wire(0.7e-3);
        let p = (0.0, 0.0);
        let line = line_field(&w, p).unwrap();
        let rib = ribbon_field(&w, p).unwrap();
        let rel = (rib.0 - line.0).hypot(rib.1 - line.1) / line.0.hypot(line.1);
        assert!(rel < 0.03, "{rel}");
        w.cross_section = (2e-9, 2e-9);
        let rib = ribbon_field(&w, p).unwrap();
        let rel = (rib.0 - line.0).hypot(rib.1 - line.1) / line.0.hypot(line.1);
        assert!(rel < 1e-4, "{rel}");
    }
}
