use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::dd;

use super::frame::{frame_from_slope, NormalFrame};
use super::lattice::{exceeds_by_more_than_one, for_each_near_line, norm_sq};
use crate::error::{Error, Result};

/// Angular tolerance for declaring `n` parallel to an integer vector.
pub const RATIONAL_ANGLE_TOL: f64 = 1e-10;

/// Denominator bound used when a routine needs to know whether a frame is
/// rational "at the scale of interest".
pub const DEFAULT_RATIONAL_QMAX: u64 = 1000;

/// Smallest integer vector `p` with `|p_i| ≤ qmax` parallel to `n` (within
/// [`RATIONAL_ANGLE_TOL`]), oriented so that `p·n > 0`.
pub fn rationality_test(frame: &NormalFrame, qmax: u64) -> Option<Vec<i64>> {
    let n = &frame.n;
    let d = n.len();
    let j = (0..d).max_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))?;
    let sign = n[j].signum();
    for q in 1..=qmax as i64 {
        let p: Vec<i64> = (0..d)
            .map(|k| {
                if k == j {
                    (sign as i64) * q
                } else {
                    (q as f64 * n[k] / n[j].abs()).round() as i64
                }
            })
            .collect();
        if p.iter().any(|&c| c.unsigned_abs() > qmax) {
            continue;
        }
        let pf: Vec<f64> = p.iter().map(|&c| c as f64).collect();
        let pn = pf.iter().map(|x| x * x).sum::<f64>().sqrt();
        let along: f64 = pf.iter().zip(n).map(|(a, b)| a * b).sum();
        let perp = pf
            .iter()
            .zip(n)
            .map(|(a, b)| (a - along * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if perp / pn < RATIONAL_ANGLE_TOL {
            return Some(p);
        }
    }
    None
}

/// Primitive integer vector spanning the tangent line of a rational 2D frame,
/// oriented along the first column of `M`.
pub fn tangential_generator(frame: &NormalFrame, p: &[i64]) -> Vec<i64> {
    assert_eq!(p.len(), 2, "tangential generator is defined for d = 2");
    let g = vec![p[1], -p[0]];
    let t = frame.tangent(0);
    if (g[0] as f64) * t[0] + (g[1] as f64) * t[1] < 0.0 {
        vec![-g[0], -g[1]]
    } else {
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeRecord {
    pub xi: Vec<i64>,
    pub abs_ndot_xi: f64,
    pub norm_xi: f64,
    pub violates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineReport {
    pub tau: f64,
    pub best_constant: f64,
    pub worst_xi: Vec<i64>,
    pub radius: u64,
    /// Lattice vectors with `|Nᵀξ| < |ξ|^{-d-τ}`, in scan order.
    pub violations: Vec<LatticeRecord>,
    /// Integer direction found by the rationality test, when `n` is rational
    /// at scale `radius`; exact zeros of `Nᵀξ` are then expected.
    pub rational_direction: Option<Vec<i64>>,
}

/// Scans `0 < |ξ| ≤ radius` for the small-divisor inequality
/// `|Nᵀξ| ≥ C |ξ|^{-d-τ}`.
///
/// Only the tube `|Nᵀξ| < 1` is visited: outside it `|Nᵀξ|·|ξ|^{d+τ} ≥ 1`,
/// while some unit vector inside has `|Nᵀξ| ≤ √((d-1)/d) < 1`, so the
/// infimum and every violation lie in the tube.
pub fn small_divisor_scan(frame: &NormalFrame, tau: f64, radius: u64) -> Result<DiophantineReport> {
    if radius < 1 {
        return Err(Error::invalid("scan radius must be at least 1"));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid("tau must be finite and nonnegative"));
    }
    let d = frame.dim() as f64;
    let exponent = d + tau;
    let mut best = f64::INFINITY;
    let mut worst: Vec<i64> = Vec::new();
    let mut violations = Vec::new();

    for_each_near_line(frame, radius, 1.0, |xi, t| {
        let nrm = (norm_sq(xi) as f64).sqrt();
        let c = t * nrm.powf(exponent);
        if c < best || (c == best && xi < worst.as_slice()) {
            best = c;
            worst = xi.to_vec();
        }
        if t < nrm.powf(-exponent) {
            violations.push(LatticeRecord {
                xi: xi.to_vec(),
                abs_ndot_xi: t,
                norm_xi: nrm,
                violates: true,
            });
        }
    });

    Ok(DiophantineReport {
        tau,
        best_constant: best,
        worst_xi: worst,
        radius,
        violations,
        rational_direction: rationality_test(frame, radius),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiEntry {
    pub level: u32,
    pub xi: Vec<i64>,
    pub abs_ndot_xi: f64,
    pub norm_xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiSequence {
    pub entries: Vec<XiEntry>,
    pub search_radius: u64,
    /// Fewer than the requested number of levels were found within the radius.
    pub truncated: bool,
}

/// `|Nᵀξ| < (1/M)|ξ|^{-M}`, compared in log space.
pub fn satisfies_level(abs_ndot_xi: f64, norm_sq_xi: i128, level: u32) -> bool {
    if abs_ndot_xi == 0.0 {
        return true;
    }
    let m = level as f64;
    abs_ndot_xi.ln() < -m.ln() - 0.5 * m * (norm_sq_xi as f64).ln()
}

/// Builds `ξ_1, ξ_2, ...` where `ξ_M` is the shortest lattice vector with
/// `|ξ_M| > |ξ_{M-1}| + 1` and `|Nᵀξ_M| < (1/M)|ξ_M|^{-M}`. Ties in norm go to
/// the lexicographically smallest vector.
pub fn xi_sequence(frame: &NormalFrame, m_max: u32, search_radius: u64) -> Result<XiSequence> {
    if m_max < 1 {
        return Err(Error::invalid("M_max must be at least 1"));
    }
    if let Some(p) = rationality_test(frame, DEFAULT_RATIONAL_QMAX) {
        return Err(Error::invalid(format!(
            "normal is rational (parallel to {p:?}); the sequence needs an irrational direction"
        )));
    }

    // Every level requires |Nᵀξ| < |ξ|^{-1}; collect that set once.
    let mut candidates: Vec<(i128, Vec<i64>, f64)> = Vec::new();
    for_each_near_line(frame, search_radius, 1.0, |xi, t| {
        let n2 = norm_sq(xi);
        if satisfies_level(t, n2, 1) {
            candidates.push((n2, xi.to_vec(), t));
        }
    });
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut entries: Vec<XiEntry> = Vec::new();
    let mut prev_sq: Option<i128> = None;
    let mut truncated = false;
    for level in 1..=m_max {
        let found = candidates.iter().find(|(n2, _, t)| {
            prev_sq.is_none_or(|p| exceeds_by_more_than_one(*n2, p)) && satisfies_level(*t, *n2, level)
        });
        match found {
            Some((n2, xi, t)) => {
                entries.push(XiEntry {
                    level,
                    xi: xi.clone(),
                    abs_ndot_xi: *t,
                    norm_xi: (*n2 as f64).sqrt(),
                });
                prev_sq = Some(*n2);
            }
            None if level == 1 => {
                return Err(Error::NoWitness { radius: search_radius, level });
            }
            None => {
                truncated = true;
                break;
            }
        }
    }
    Ok(XiSequence {
        entries,
        search_radius,
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleDirection {
    pub frame: NormalFrame,
    pub levels: u32,
    /// `L = Σ_{k≤levels} 10^{-k!}` as a double-double pair.
    pub slope: (f64, f64),
    /// The truncated slope is the rational `p / 10^{levels!}`; below this lattice
    /// scale the frame behaves like the Liouville direction.
    pub validity_radius: f64,
}

/// Frame with tangent `(1, L)/√(1+L²)`, `L = Σ_{k=1..levels} 10^{-k!}`.
pub fn liouville_direction(levels: u32) -> Result<LiouvilleDirection> {
    if levels < 3 {
        return Err(Error::invalid("Liouville direction needs at least 3 levels"));
    }
    let fact: u64 = (1..=levels as u64).product();
    if fact > 30 {
        return Err(Error::invalid(format!(
            "levels = {levels} needs 10^-{fact}, below double-double resolution; use levels <= 4"
        )));
    }
    let mut slope = TwoFloat::from(0.0);
    let mut kf = 1u32;
    for k in 1..=levels {
        kf *= k;
        slope += dd::pow10_neg(kf);
    }
    Ok(LiouvilleDirection {
        frame: frame_from_slope(slope, 0.0)?,
        levels,
        slope: (slope.hi(), slope.lo()),
        validity_radius: 10f64.powi(fact as i32),
    })
}
