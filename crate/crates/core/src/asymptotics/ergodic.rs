use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rationality_test, NormalFrame, DEFAULT_RATIONAL_QMAX};
use crate::quadrature::gauss_legendre;

const PANEL_WIDTH: f64 = 0.05;
const PANEL_ORDER: usize = 12;
const TORUS_GRID: usize = 256;
/// Gap at the largest window beyond which a rational frame is called resonant.
const RESONANCE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMean {
    pub radius: f64,
    pub mean: f64,
    /// `|mean − torus mean|`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicReport {
    pub windows: Vec<WindowMean>,
    pub torus_mean: f64,
    /// `max_R R·gap(R)`.
    pub gap_times_radius: f64,
    pub rational: bool,
    /// Rational frame whose line averages stay away from the torus mean.
    pub resonant: bool,
}

/// Line averages `(1/2R)∫_{−R}^{R} F(M(s, a)) ds` of a function on `T²`
/// against its torus mean (trapezoid rule on a 256² grid, exact for
/// trigonometric polynomials of degree below 256).
pub fn ergodic_mean(f: &dyn Fn([f64; 2]) -> f64, frame: &NormalFrame, radii: &[f64]) -> Result<ErgodicReport> {
    if frame.dim() != 2 {
        return Err(Error::invalid("ergodic means are computed on T²"));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::invalid("window radii must be positive"));
    }
    let g = TORUS_GRID as f64;
    let mut torus_mean = 0.0;
    for i in 0..TORUS_GRID {
        for j in 0..TORUS_GRID {
            torus_mean += f([i as f64 / g, j as f64 / g]);
        }
    }
    torus_mean /= g * g;

    let (x, w) = gauss_legendre(PANEL_ORDER);
    let mut windows = Vec::with_capacity(radii.len());
    for &r in radii {
        let panels = (2.0 * r / PANEL_WIDTH).ceil() as usize;
        let pw = 2.0 * r / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let lo = -r + p as f64 * pw;
            for (xi, wi) in x.iter().zip(&w) {
                let b = frame.boundary_point(&[lo + 0.5 * pw * (xi + 1.0)]);
                acc += 0.5 * pw * wi * f([b[0], b[1]]);
            }
        }
        let mean = acc / (2.0 * r);
        windows.push(WindowMean {
            radius: r,
            mean,
            gap: (mean - torus_mean).abs(),
        });
    }
    let rational = rationality_test(frame, DEFAULT_RATIONAL_QMAX).is_some();
    let last_gap = windows
        .iter()
        .max_by(|a, b| a.radius.total_cmp(&b.radius))
        .map_or(0.0, |w| w.gap);
    Ok(ErgodicReport {
        gap_times_radius: windows.iter().map(|w| w.radius * w.gap).fold(0.0, f64::max),
        windows,
        torus_mean,
        rational,
        resonant: rational && last_gap > RESONANCE_GAP,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_frame, golden_frame};
    use std::f64::consts::PI;

    #[test]
    fn constant_function() {
        let rep = ergodic_mean(&|_| 1.0, &golden_frame(0.0), &[1.0, 10.0]).unwrap();
        for w in &rep.windows {
            assert!((w.mean - 1.0).abs() < 1e-13);
        }
        assert!(!rep.resonant);
    }

    #[test]
    fn golden_cosine_window_means() {
        let frame = golden_frame(0.0);
        let radii = [2.0, 8.0, 32.0, 128.0];
        let rep = ergodic_mean(&|th| (2.0 * PI * th[0]).cos(), &frame, &radii).unwrap();
        // along the line the argument is 2π t₁ s with t₁ the first tangent entry
        let t1 = frame.tangent(0)[0];
        for w in &rep.windows {
            let exact = (2.0 * PI * t1 * w.radius).sin() / (2.0 * PI * t1 * w.radius);
            assert!((w.mean - exact).abs() < 1e-10);
            assert!(w.gap <= 1.0 / (2.0 * PI * t1 * w.radius) + 1e-12);
        }
        assert!(rep.torus_mean.abs() < 1e-14);
    }

    #[test]
    fn rational_resonance_is_flagged() {
        // n = (0,1): the line is θ₂ = 0 and cos(2πθ₂) ≡ 1 on it
        let frame = build_frame(&[0.0, 1.0], 0.0).unwrap();
        let rep = ergodic_mean(&|th| (2.0 * PI * th[1]).cos(), &frame, &[4.0, 16.0]).unwrap();
        assert!(rep.rational && rep.resonant);
        assert!((rep.windows[1].gap - 1.0).abs() < 1e-12);
    }
}
