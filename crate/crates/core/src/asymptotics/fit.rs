use serde::{Deserialize, Serialize};

use crate::blsolver::{linear_fit, SlabNorm};
use crate::error::{Error, Result};

/// Log-residual above which a fitted model is not reported as such.
pub const FIT_RESIDUAL_LIMIT: f64 = 0.05;
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub c: f64,
    /// `norm ≈ C e^{−κt}`.
    pub kappa: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub used: usize,
    /// Samples dropped for nonpositive norms (or nonpositive `t` for power fits).
    pub dropped: usize,
    pub downgraded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub c: f64,
    /// `norm ≈ C t^{slope}`.
    pub slope: f64,
    pub residual: f64,
    pub used: usize,
    pub dropped: usize,
    pub downgraded: bool,
}

fn log_fit(x: Vec<f64>, y: Vec<f64>, dropped: usize) -> Result<(f64, f64, f64, usize, usize)> {
    if x.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} usable samples, at least {MIN_FIT_POINTS} needed",
            x.len()
        )));
    }
    let (slope, intercept) = linear_fit(&x, &y);
    let rms = (x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    Ok((slope, intercept, rms, x.len(), dropped))
}

fn usable(samples: &[(f64, f64)], need_positive_t: bool) -> (Vec<(f64, f64)>, usize) {
    let kept: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(t, v)| v > 0.0 && v.is_finite() && (!need_positive_t || t > 0.0))
        .collect();
    let dropped = samples.len() - kept.len();
    (kept, dropped)
}

/// Least squares of `log norm` against `t`.
pub fn fit_exponential(samples: &[(f64, f64)]) -> Result<ExponentialFit> {
    let (kept, dropped) = usable(samples, false);
    let (s, i, rms, used, dropped) = log_fit(
        kept.iter().map(|p| p.0).collect(),
        kept.iter().map(|p| p.1.ln()).collect(),
        dropped,
    )?;
    Ok(ExponentialFit {
        c: i.exp(),
        kappa: -s,
        residual: rms,
        used,
        dropped,
        downgraded: rms > FIT_RESIDUAL_LIMIT,
    })
}

/// Least squares of `log norm` against `log t`.
pub fn fit_power(samples: &[(f64, f64)]) -> Result<PowerFit> {
    let (kept, dropped) = usable(samples, true);
    let (s, i, rms, used, dropped) = log_fit(
        kept.iter().map(|p| p.0.ln()).collect(),
        kept.iter().map(|p| p.1.ln()).collect(),
        dropped,
    )?;
    Ok(PowerFit {
        c: i.exp(),
        slope: s,
        residual: rms,
        used,
        dropped,
        downgraded: rms > FIT_RESIDUAL_LIMIT,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSup {
    pub m: u32,
    /// `sup_t t^m·‖V(·,t) − v̂₀(0)‖`.
    pub sup: f64,
    pub t_at_sup: f64,
    /// `t^m·norm` does not grow over the top 10% of the samples.
    pub flat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum DecayModel {
    Exponential { c: f64, kappa: f64 },
    Power { c: f64, slope: f64 },
    SuperPolynomial { moments: Vec<MomentSup> },
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub samples: Vec<SlabNorm>,
    pub model: DecayModel,
    pub tail: f64,
    pub residual: f64,
    /// The exponential model was rejected by the residual limit.
    pub downgraded: bool,
}

impl DecayReport {
    /// Classifies `l2` decay: exponential if its log-fit is within the
    /// residual limit, otherwise power, otherwise undetermined. Samples with
    /// `l2 < floor` are excluded from the fits (kept in the report).
    pub fn classify(samples: Vec<SlabNorm>, tail: f64, floor: f64) -> Result<Self> {
        check_samples(&samples)?;
        let pts: Vec<(f64, f64)> = samples.iter().filter(|s| s.l2 >= floor).map(|s| (s.t, s.l2)).collect();
        let exp = fit_exponential(&pts)?;
        if !exp.downgraded {
            return Ok(DecayReport {
                samples,
                model: DecayModel::Exponential { c: exp.c, kappa: exp.kappa },
                tail,
                residual: exp.residual,
                downgraded: false,
            });
        }
        let (model, residual) = match fit_power(&pts) {
            Ok(p) if !p.downgraded => (DecayModel::Power { c: p.c, slope: p.slope }, p.residual),
            _ => (DecayModel::Undetermined, exp.residual),
        };
        Ok(DecayReport {
            samples,
            model,
            tail,
            residual,
            downgraded: true,
        })
    }

    pub fn to_csv(&self) -> String {
        crate::blsolver::slab_norms_csv(&self.samples)
    }
}

pub(crate) fn check_samples(samples: &[SlabNorm]) -> Result<()> {
    if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::invalid("sample heights must be strictly increasing"));
    }
    if samples.iter().any(|s| !(s.l2 >= 0.0 && s.linf >= 0.0)) {
        return Err(Error::invalid("sample norms must be nonnegative"));
    }
    Ok(())
}

/// Per-`m` sup of `t^m·l2` over the samples, with the flatness test over
/// the top 10% of them.
pub fn moment_sups(samples: &[SlabNorm], m_list: &[u32]) -> Vec<MomentSup> {
    let top = samples.len() - (samples.len() / 10).max(1).min(samples.len());
    m_list
        .iter()
        .map(|&m| {
            let g: Vec<f64> = samples.iter().map(|s| s.t.powi(m as i32) * s.l2).collect();
            let (arg, sup) = g
                .iter()
                .enumerate()
                .fold((0, 0.0), |(ai, av), (i, &v)| if v > av { (i, v) } else { (ai, av) });
            let tail = &g[top.saturating_sub(1)..];
            let flat = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) && (sup == 0.0 || arg + 1 < g.len());
            MomentSup {
                m,
                sup,
                t_at_sup: samples.get(arg).map_or(0.0, |s| s.t),
                flat,
            }
        })
        .collect()
}
