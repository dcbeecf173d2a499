use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blsolver::{solve_series_laplacian, FourierBoundaryData};
use crate::error::{Error, Result};
use crate::geometry::{xi_sequence, NormalFrame, XiSequence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessVariant {
    L2,
    /// Pointwise at the boundary foot `s = 0`; levels below `M₁` are
    /// dropped so that `2π|Nᵀξ_M|R < π/4` holds on the window `|s| ≤ R`.
    Linf { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessLevel {
    pub level: u32,
    pub xi: [i64; 2],
    pub abs_ndot_xi: f64,
    pub norm_xi: f64,
    /// `ln(M^{−l}|ξ_M|^{−Ml})`.
    pub log_coef: f64,
    /// `ln t_M`, `t_M = l·M|ξ_M|^M/(2π)`.
    pub log_t: f64,
    pub retained: bool,
}

impl WitnessLevel {
    pub fn coef(&self) -> f64 {
        self.log_coef.exp()
    }

    pub fn t(&self) -> f64 {
        self.log_t.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowWitness {
    pub l: f64,
    pub variant: WitnessVariant,
    /// First retained level (`1` for the L2 variant).
    pub m_start: u32,
    pub levels: Vec<WitnessLevel>,
    pub xi_seq: XiSequence,
}

impl SlowWitness {
    /// `v₀ = Σ_{retained M} 2c_M cos(2πξ_M·θ)`, i.e. `v̂₀(±ξ_M) = c_M`.
    pub fn boundary_data(&self) -> FourierBoundaryData {
        self.levels
            .iter()
            .filter(|lv| lv.retained)
            .fold(FourierBoundaryData::zero(), |acc, lv| {
                acc.plus(&FourierBoundaryData::cosine(lv.xi, 2.0 * lv.coef()))
            })
    }
}

/// Smallest `M` for which `2π|Nᵀξ_M|R < (2πR/M)|ξ_M|^{−M} ≤ 2πR/M < π/4`
/// holds, checked on the built levels and, past them, on the last link.
fn first_retained_level(levels: &[WitnessLevel], radius: f64) -> u32 {
    let chain = |lv: &WitnessLevel| {
        let m = lv.level as f64;
        let ln_mid = (2.0 * PI * radius / m).ln() - m * lv.norm_xi.ln();
        let ln_lhs = (2.0 * PI * lv.abs_ndot_xi * radius).ln();
        ln_lhs < ln_mid && lv.norm_xi >= 1.0 && 2.0 * PI * radius / m < PI / 4.0
    };
    for lv in levels {
        if chain(lv) {
            return lv.level;
        }
    }
    // the last link alone forces M > 8R
    ((8.0 * radius).floor() as u32 + 1).max(levels.len() as u32 + 1)
}

/// Builds the slow-convergence data on `ξ_1, …, ξ_{M_max}`.
pub fn slow_witness_build(
    frame: &NormalFrame,
    l: f64,
    m_max: u32,
    variant: WitnessVariant,
    search_radius: u64,
) -> Result<SlowWitness> {
    slow_witness_from_sequence(xi_sequence(frame, m_max, search_radius)?, l, variant)
}

/// Same as [`slow_witness_build`] on a sequence already computed.
pub fn slow_witness_from_sequence(xi_seq: XiSequence, l: f64, variant: WitnessVariant) -> Result<SlowWitness> {
    if !(l > 0.0) {
        return Err(Error::invalid("exponent l must be positive"));
    }
    if let WitnessVariant::Linf { radius } = variant {
        if !(radius > 0.0) {
            return Err(Error::invalid("window radius must be positive"));
        }
    }
    if xi_seq.entries.iter().any(|e| e.xi.len() != 2) {
        return Err(Error::invalid("witness data live on T²"));
    }
    let mut levels: Vec<WitnessLevel> = xi_seq
        .entries
        .iter()
        .map(|e| {
            let m = e.level as f64;
            let ln_xi = e.norm_xi.ln();
            WitnessLevel {
                level: e.level,
                xi: [e.xi[0], e.xi[1]],
                abs_ndot_xi: e.abs_ndot_xi,
                norm_xi: e.norm_xi,
                log_coef: -l * m.ln() - m * l * ln_xi,
                log_t: l.ln() + m.ln() + m * ln_xi - (2.0 * PI).ln(),
                retained: true,
            }
        })
        .collect();
    let m_start = match variant {
        WitnessVariant::L2 => 1,
        WitnessVariant::Linf { radius } => {
            let m1 = first_retained_level(&levels, radius);
            for lv in &mut levels {
                lv.retained = lv.level >= m1;
            }
            m1
        }
    };
    Ok(SlowWitness {
        l,
        variant,
        m_start,
        levels,
        xi_seq,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub level: u32,
    pub xi: [i64; 2],
    pub abs_ndot_xi: f64,
    pub t: f64,
    pub log_t: f64,
    /// `‖V(·,t_M) − v̂₀(0)‖_{L²}` or `v(0, t_M) − v̂₀(0)`.
    pub value: f64,
    pub log_value: f64,
    /// `t_M^{−l}`.
    pub threshold: f64,
    pub log_threshold: f64,
    /// `ln(√2(e^{−1}l/2π)^l t_M^{−l})`.
    pub log_weak_threshold: f64,
    pub pass: bool,
    pub weak_pass: bool,
    /// Some factor was not finite even in log space.
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub l: f64,
    pub variant: WitnessVariant,
    pub m_start: u32,
    pub rows: Vec<WitnessRow>,
}

impl WitnessReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass && !r.skipped)
    }

    pub fn all_weak_pass(&self) -> bool {
        self.rows.iter().all(|r| r.weak_pass && !r.skipped)
    }

    /// Columns `M,xi1,xi2,absNdotxi,tM,value,threshold,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("M,xi1,xi2,absNdotxi,tM,value,threshold,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                r.level, r.xi[0], r.xi[1], r.abs_ndot_xi, r.t, r.value, r.threshold, r.pass
            );
        }
        s
    }
}

/// `ln Σ sᵢ e^{xᵢ}` for signed terms; `None` if the sum is not positive.
fn signed_log_sum(terms: &[(f64, f64)]) -> Option<f64> {
    let mx = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    if !mx.is_finite() {
        return None;
    }
    let s: f64 = terms.iter().map(|(sign, x)| sign * (x - mx).exp()).sum();
    (s > 0.0).then(|| mx + s.ln())
}

/// Evaluates the witness at every retained `t_M` with all factors in log space.
pub fn slow_witness_verify(w: &SlowWitness, frame: &NormalFrame) -> Result<WitnessReport> {
    let retained: Vec<&WitnessLevel> = w.levels.iter().filter(|lv| lv.retained).collect();
    let l = w.l;
    let weak_const = 0.5 * 2f64.ln() + l * (l.ln() - 1.0 - (2.0 * PI).ln());
    let mut rows = Vec::with_capacity(retained.len());
    for lv in &retained {
        let log_t = lv.log_t;
        let t = lv.t();
        // per term: ln|term| and sign
        let mut terms = Vec::with_capacity(retained.len());
        let mut finite = log_t.is_finite();
        for k in &retained {
            let rt = 2.0 * PI * k.abs_ndot_xi * t;
            match w.variant {
                WitnessVariant::L2 => {
                    let x = 2f64.ln() + 2.0 * k.log_coef - 2.0 * rt;
                    finite &= x.is_finite() || x == f64::NEG_INFINITY;
                    terms.push((1.0, x));
                }
                WitnessVariant::Linf { .. } => {
                    let ph = 2.0 * PI * frame.a * (k.xi[0] as f64 * frame.n[0] + k.xi[1] as f64 * frame.n[1]);
                    let c = ph.cos();
                    let x = 2f64.ln() + k.log_coef - rt + c.abs().ln();
                    finite &= x.is_finite() || x == f64::NEG_INFINITY;
                    terms.push((c.signum(), x));
                }
            }
        }
        let log_value = match w.variant {
            WitnessVariant::L2 => signed_log_sum(&terms).map(|x| 0.5 * x),
            WitnessVariant::Linf { .. } => signed_log_sum(&terms),
        };
        let log_threshold = -l * log_t;
        let log_weak = weak_const - l * log_t;
        let skipped = !finite || log_value.is_none() && terms.iter().all(|t| t.0 >= 0.0);
        let lv_ = log_value.unwrap_or(f64::NEG_INFINITY);
        rows.push(WitnessRow {
            level: lv.level,
            xi: lv.xi,
            abs_ndot_xi: lv.abs_ndot_xi,
            t,
            log_t,
            value: log_value.map_or(0.0, f64::exp),
            log_value: lv_,
            threshold: log_threshold.exp(),
            log_threshold,
            log_weak_threshold: log_weak,
            pass: !skipped && lv_ >= log_threshold,
            weak_pass: !skipped && lv_ >= log_weak,
            skipped,
        });
    }
    Ok(WitnessReport {
        l,
        variant: w.variant,
        m_start: w.m_start,
        rows,
    })
}

/// Recomputes each row's value by direct summation of the series built
/// from the raw coefficients; returns the largest relative discrepancy.
pub fn witness_oracle_discrepancy(w: &SlowWitness, frame: &NormalFrame, report: &WitnessReport) -> Result<f64> {
    let field = solve_series_laplacian(&w.boundary_data(), frame)?;
    let mut worst: f64 = 0.0;
    for r in &report.rows {
        let direct = match w.variant {
            WitnessVariant::L2 => field.l2_fluctuation(r.t),
            WitnessVariant::Linf { .. } => field.eval_physical(0.0, r.t) - field.mean(),
        };
        if direct == 0.0 && r.value == 0.0 {
            continue;
        }
        worst = worst.max((direct - r.value).abs() / direct.abs().max(r.value.abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::liouville_direction;

    fn liouville() -> NormalFrame {
        liouville_direction(3).unwrap().frame
    }

    #[test]
    fn coefficients_and_times_follow_the_table() {
        let frame = liouville();
        let w = slow_witness_build(&frame, 1.0, 3, WitnessVariant::L2, 1_100_000).unwrap();
        // past |ξ| = 10⁶ the truncated slope is rational: level 2 is its exact
        // lattice vector and level 3 would only be a multiple of it
        assert_eq!(w.levels.len(), 2);
        assert!(w.xi_seq.truncated);
        assert_eq!(w.levels[1].xi, [-110001, 1000000]);
        for lv in &w.levels {
            let m = lv.level as f64;
            let c = m.powf(-1.0) * lv.norm_xi.powf(-m);
            assert!((lv.coef() - c).abs() <= 1e-12 * c);
            let t = m * lv.norm_xi.powf(m) / (2.0 * PI);
            assert!((lv.t() - t).abs() <= 1e-12 * t);
        }
        assert!(w.levels.windows(2).all(|p| p[1].t() > p[0].t()));
        let d = w.boundary_data();
        for lv in &w.levels {
            assert!((d.coefficient(lv.xi).re - lv.coef()).abs() <= 1e-15 * lv.coef());
        }
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn weak_bound_holds_and_matches_direct_sum() {
        let frame = liouville();
        for l in [1.0, 2.0] {
            let w = slow_witness_build(&frame, l, 3, WitnessVariant::L2, 1_100_000).unwrap();
            let rep = slow_witness_verify(&w, &frame).unwrap();
            assert!(rep.all_weak_pass());
            assert!(witness_oracle_discrepancy(&w, &frame, &rep).unwrap() < 1e-10);
            // single-term lower bound √2 c_M e^{−l}
            for (r, lv) in rep.rows.iter().zip(&w.levels) {
                assert!(r.log_value >= 0.5 * 2f64.ln() + lv.log_coef - l - 1e-12);
            }
        }
    }

    #[test]
    fn linf_start_level_from_inequality_chain() {
        let frame = liouville();
        let w = slow_witness_build(&frame, 1.0, 3, WitnessVariant::Linf { radius: 1.0 }, 1_100_000).unwrap();
        assert!(2.0 * PI / w.m_start as f64 <= PI / 4.0);
        assert_eq!(w.m_start, 9);
        assert!(w.levels.iter().all(|lv| !lv.retained));
        let w = slow_witness_build(&frame, 1.0, 3, WitnessVariant::Linf { radius: 0.1 }, 1_100_000).unwrap();
        assert_eq!(w.m_start, 1);
        let rep = slow_witness_verify(&w, &frame).unwrap();
        assert!(witness_oracle_discrepancy(&w, &frame, &rep).unwrap() < 1e-10);
    }

    #[test]
    fn constant_shift_leaves_report_unchanged() {
        let frame = liouville();
        let w = slow_witness_build(&frame, 1.0, 2, WitnessVariant::L2, 1_100_000).unwrap();
        let f0 = solve_series_laplacian(&w.boundary_data(), &frame).unwrap();
        let f1 = solve_series_laplacian(&w.boundary_data().plus(&FourierBoundaryData::constant(3.0)), &frame).unwrap();
        for lv in &w.levels {
            assert_eq!(f0.l2_fluctuation(lv.t()), f1.l2_fluctuation(lv.t()));
        }
        assert_eq!(f1.tail(), 3.0);
    }

    #[test]
    fn csv_layout() {
        let frame = liouville();
        let w = slow_witness_build(&frame, 1.0, 2, WitnessVariant::L2, 1_100_000).unwrap();
        let csv = slow_witness_verify(&w, &frame).unwrap().to_csv();
        assert!(csv.starts_with("M,xi1,xi2,absNdotxi,tM,value,threshold,pass\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
