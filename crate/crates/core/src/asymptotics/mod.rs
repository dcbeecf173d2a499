//! Tails, ergodic means, decay fits and the slow-convergence witness.

mod ergodic;
mod fit;
mod witness;

use serde::{Deserialize, Serialize};

pub use ergodic::{ergodic_mean, ErgodicReport, WindowMean};
pub use fit::{
    fit_exponential, fit_power, moment_sups, DecayModel, DecayReport, ExponentialFit, MomentSup, PowerFit,
    FIT_RESIDUAL_LIMIT, MIN_FIT_POINTS,
};
pub use witness::{
    slow_witness_build, slow_witness_from_sequence, slow_witness_verify, witness_oracle_discrepancy, SlowWitness, WitnessLevel, WitnessReport,
    WitnessRow, WitnessVariant,
};

use crate::blsolver::{
    solve_quasiperiodic_regularized, solve_series_laplacian, BoundaryLayerField, FourierBoundaryData, GridField,
    SeriesField, SlabNorm, StripGrid,
};
use crate::cell::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::{rationality_test, tangential_generator, NormalFrame, DEFAULT_RATIONAL_QMAX};
use crate::quadrature::periodic_mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    Plateau,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub value: f64,
    /// Top-slab oscillation (plateau) or `0` (series).
    pub uncertainty: f64,
    pub method: TailMethod,
}

/// Far-field value of a boundary-layer field. The plateau method averages
/// the top 10% of levels and refuses when their oscillation exceeds
/// `10·plateau_tol`.
pub fn tail_estimate(field: &BoundaryLayerField, method: TailMethod, plateau_tol: f64) -> Result<TailEstimate> {
    match (field, method) {
        (BoundaryLayerField::Series(s), TailMethod::Series) => Ok(TailEstimate {
            value: s.tail(),
            uncertainty: 0.0,
            method,
        }),
        (BoundaryLayerField::Grid(g), TailMethod::Plateau) => plateau_tail(g, plateau_tol),
        (BoundaryLayerField::Series(_), TailMethod::Plateau) => {
            Err(Error::invalid("plateau tails need a grid field; use the series method"))
        }
        (BoundaryLayerField::Grid(_), TailMethod::Series) => {
            Err(Error::invalid("series tails need a series field; use the plateau method"))
        }
    }
}

fn plateau_tail(g: &GridField, plateau_tol: f64) -> Result<TailEstimate> {
    let (mean, osc) = g.top_slab();
    if osc > 10.0 * plateau_tol {
        return Err(Error::NotPlateaued { oscillation: osc });
    }
    Ok(TailEstimate {
        value: mean,
        uncertainty: osc,
        method: TailMethod::Plateau,
    })
}

/// Laplacian tail for a rational normal: the mean of `v₀` over one
/// tangential period of the line `{y·n = ā}`.
pub fn rational_tail_formula(v0: &dyn Fn([f64; 2]) -> f64, frame: &NormalFrame, a_frac: f64) -> Result<f64> {
    if frame.dim() != 2 {
        return Err(Error::invalid("tail formula is two-dimensional"));
    }
    let p = rationality_test(frame, DEFAULT_RATIONAL_QMAX)
        .ok_or_else(|| Error::invalid("tail formula needs a rational normal"))?;
    let g = tangential_generator(frame, &p);
    let period = ((g[0] * g[0] + g[1] * g[1]) as f64).sqrt();
    let line = frame.with_offset(a_frac);
    Ok(periodic_mean(
        |s| {
            let b = line.boundary_point(&[s]);
            v0([b[0], b[1]])
        },
        0.0,
        period,
        1e-10,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDivisorReport {
    pub moments: Vec<MomentSup>,
    pub samples: Vec<SlabNorm>,
    pub all_flat: bool,
}

/// `sup_t t^m·‖V(·,t) − v̂₀(0)‖_{L²}` per `m` from the exact series.
pub fn small_divisor_decay_check(field: &SeriesField, m_list: &[u32], t_grid: &[f64]) -> Result<SmallDivisorReport> {
    let samples: Vec<SlabNorm> = t_grid
        .iter()
        .map(|&t| SlabNorm {
            t,
            l2: field.l2_fluctuation(t),
            linf: field.linf_bound(t),
        })
        .collect();
    fit::check_samples(&samples)?;
    let moments = moment_sups(&samples, m_list);
    Ok(SmallDivisorReport {
        all_flat: moments.iter().all(|m| m.flat),
        moments,
        samples,
    })
}

/// The `count` nonzero lattice vectors of norm `≤ radius` with the smallest
/// `|Nᵀξ|` (one of each `±ξ`), ties broken by norm then lexicographically.
pub fn smallest_divisor_modes(frame: &NormalFrame, radius: i64, count: usize) -> Vec<[i64; 2]> {
    let mut v: Vec<(f64, i64, [i64; 2])> = Vec::new();
    for a in -radius..=radius {
        for b in 0..=radius {
            if (b == 0 && a <= 0) || a * a + b * b > radius * radius {
                continue;
            }
            v.push((frame.tangential_norm(&[a, b]), a * a + b * b, [a, b]));
        }
    }
    v.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    v.into_iter().take(count).map(|e| e.2).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "path", rename_all = "snake_case", deny_unknown_fields)]
pub enum OffsetPath {
    Series,
    Grid {
        grid: StripGrid,
        t_max: f64,
        #[serde(default)]
        iota: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetRow {
    pub a: f64,
    pub tail: f64,
    /// Rational frames only: the closed-form Laplacian tail.
    pub formula: Option<f64>,
    /// `|tail − tail at the first offset|`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetReport {
    pub rows: Vec<OffsetRow>,
    pub spread: f64,
    pub rational: bool,
    /// Solver tolerance of the grid path (`0` for series).
    pub tolerance: f64,
}

/// Tails of the boundary-layer problem over the offsets `a_list`.
pub fn tail_offset_independence(
    v0: &FourierBoundaryData,
    coeffs: &dyn CoefficientField,
    frame: &NormalFrame,
    a_list: &[f64],
    path: OffsetPath,
) -> Result<OffsetReport> {
    if a_list.is_empty() {
        return Err(Error::invalid("no offsets given"));
    }
    let rational = rationality_test(frame, DEFAULT_RATIONAL_QMAX).is_some();
    let mut rows: Vec<OffsetRow> = Vec::with_capacity(a_list.len());
    let mut tolerance = 0.0;
    for &a in a_list {
        let f = frame.with_offset(a);
        let tail = match path {
            OffsetPath::Series => solve_series_laplacian(v0, &f)?.tail(),
            OffsetPath::Grid { grid, t_max, iota } => {
                let g = solve_quasiperiodic_regularized(coeffs, v0, &f, iota, t_max, grid)?;
                tolerance = g.tolerance;
                plateau_tail(&g, g.tolerance)?.value
            }
        };
        let formula = if rational {
            Some(rational_tail_formula(&|y| v0.eval(y), frame, a)?)
        } else {
            None
        };
        let difference = rows.first().map_or(0.0, |r0| (tail - r0.tail).abs());
        rows.push(OffsetRow { a, tail, formula, difference });
    }
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r.tail), h.max(r.tail)));
    Ok(OffsetReport {
        rows,
        spread: hi - lo,
        rational,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blsolver::{solve_rational_strip, FourierBoundaryData};
    use crate::cell::CoefficientModel;
    use crate::geometry::{build_frame, golden_frame};
    use std::f64::consts::PI;

    fn axis(a: f64) -> NormalFrame {
        build_frame(&[0.0, 1.0], a).unwrap()
    }

    #[test]
    fn rational_formula_values() {
        let f = axis(0.0);
        assert!(rational_tail_formula(&|y| (2.0 * PI * y[0]).sin(), &f, 0.0).unwrap().abs() < 1e-12);
        let c = |y: [f64; 2]| (2.0 * PI * y[1]).cos();
        assert!((rational_tail_formula(&c, &f, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(rational_tail_formula(&c, &f, 0.25).unwrap().abs() < 1e-12);
        assert!(rational_tail_formula(&c, &golden_frame(0.0), 0.0).is_err());
    }

    #[test]
    fn series_tail_is_the_mean() {
        let d = FourierBoundaryData::cosine([1, 2], 1.0).plus(&FourierBoundaryData::constant(0.7));
        let s = solve_series_laplacian(&d, &golden_frame(0.3)).unwrap();
        let t = tail_estimate(&BoundaryLayerField::Series(s.clone()), TailMethod::Series, 0.0).unwrap();
        assert_eq!(t.value, 0.7);
        assert!(tail_estimate(&BoundaryLayerField::Series(s), TailMethod::Plateau, 1e-6).is_err());
    }

    #[test]
    fn strip_plateau_matches_formula() {
        let f = axis(0.0);
        let v0 = |y: [f64; 2]| (2.0 * PI * y[0]).sin() + 0.25 + 0.5 * (2.0 * PI * y[0]).cos().powi(2);
        let g = solve_rational_strip(&CoefficientModel::Identity, &v0, &f, 5.0, StripGrid { n_tangential: 32, nt: 200 })
            .unwrap();
        let field = BoundaryLayerField::Grid(g);
        let t = tail_estimate(&field, TailMethod::Plateau, 1e-6).unwrap();
        let exact = rational_tail_formula(&v0, &f, 0.0).unwrap();
        assert!((t.value - exact).abs() < 1e-3, "{} vs {exact}", t.value);
        assert!((exact - 0.5).abs() < 1e-10);
    }

    #[test]
    fn unsettled_field_is_not_plateaued() {
        let v0 = |y: [f64; 2]| (2.0 * PI * y[0]).sin();
        let g = solve_rational_strip(&CoefficientModel::Identity, &v0, &axis(0.0), 5.0, StripGrid { n_tangential: 16, nt: 50 })
            .unwrap();
        let field = BoundaryLayerField::Grid(g);
        assert!(matches!(
            tail_estimate(&field, TailMethod::Plateau, 1e-20),
            Err(Error::NotPlateaued { .. })
        ));
    }

    #[test]
    fn offsets_rational_and_irrational_series() {
        let d = FourierBoundaryData::cosine([0, 1], 1.0);
        let r = tail_offset_independence(&d, &CoefficientModel::Identity, &axis(0.0), &[0.0, 0.25], OffsetPath::Series)
            .unwrap();
        assert!(r.rational);
        assert!((r.rows[1].difference - 1.0).abs() < 1e-12);
        assert!((r.rows[0].formula.unwrap() - r.rows[0].tail).abs() < 1e-10);
        let d = d.plus(&FourierBoundaryData::sine([2, 1], 0.5)).plus(&FourierBoundaryData::constant(-0.2));
        let r = tail_offset_independence(
            &d,
            &CoefficientModel::Identity,
            &golden_frame(0.0),
            &[0.0, 0.3, 0.7],
            OffsetPath::Series,
        )
        .unwrap();
        assert_eq!(r.spread, 0.0);
    }

    #[test]
    fn smallest_divisors_of_golden_frame() {
        let f = golden_frame(0.0);
        let modes = smallest_divisor_modes(&f, 20, 20);
        assert_eq!(modes.len(), 20);
        let worst = modes.iter().map(|m| f.tangential_norm(m)).fold(0.0, f64::max);
        for a in -20i64..=20 {
            for b in 0..=20i64 {
                if a * a + b * b <= 400 && (b > 0 || a > 0) && !modes.contains(&[a, b]) {
                    assert!(f.tangential_norm(&[a, b]) >= worst);
                }
            }
        }
        // Fibonacci vector (−13, 8) has the smallest divisor in the ball
        assert_eq!(modes[0], [-13, 8]);
    }

    #[test]
    fn golden_superpolynomial_moments() {
        let f = golden_frame(0.0);
        let d = smallest_divisor_modes(&f, 20, 20)
            .into_iter()
            .fold(FourierBoundaryData::zero(), |acc, xi| acc.plus(&FourierBoundaryData::cosine(xi, 1.0)));
        let s = solve_series_laplacian(&d, &f).unwrap();
        let t: Vec<f64> = (0..=490).map(|i| 1.0 + i as f64 * 0.1).collect();
        let rep = small_divisor_decay_check(&s, &[1, 2, 3, 4], &t).unwrap();
        assert!(rep.all_flat);
        let zero = solve_series_laplacian(&FourierBoundaryData::constant(2.0), &f).unwrap();
        let rep = small_divisor_decay_check(&zero, &[1, 2], &t).unwrap();
        assert!(rep.moments.iter().all(|m| m.sup == 0.0));
    }
}
