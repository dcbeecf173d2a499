use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::dd;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    /// Partial quotients `a_0, a_1, ...`.
    pub quotients: Vec<i128>,
    /// Convergents `p_k / q_k`.
    pub convergents: Vec<(i128, i128)>,
    /// The expansion ended because the remainder vanished (rational input).
    pub terminated: bool,
    /// The expansion stopped before `depth` because the working precision
    /// (double-double) no longer resolves the next quotient.
    pub precision_limited: bool,
}

/// Denominators beyond this no longer carry information in double-double.
const MAX_RESOLVED_DENOMINATOR: f64 = 1e15;

pub fn continued_fraction(slope: f64, depth: usize) -> Result<ContinuedFraction> {
    continued_fraction_dd(TwoFloat::from(slope), depth)
}

/// Regular continued fraction of `slope`, evaluated in double-double.
pub fn continued_fraction_dd(slope: TwoFloat, depth: usize) -> Result<ContinuedFraction> {
    if !slope.hi().is_finite() {
        return Err(Error::invalid("slope must be finite"));
    }
    if depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    let mut out = ContinuedFraction {
        quotients: Vec::with_capacity(depth),
        convergents: Vec::with_capacity(depth),
        terminated: false,
        precision_limited: false,
    };
    let (mut p_prev, mut q_prev) = (1i128, 0i128);
    let (mut p_prev2, mut q_prev2) = (0i128, 1i128);
    let mut x = slope;
    let eps = 1e-28 * slope.hi().abs().max(1.0);

    for _ in 0..depth {
        let a = x.floor();
        let ai = a.hi() as i128 + a.lo() as i128;
        let (Some(p), Some(q)) = (
            ai.checked_mul(p_prev).and_then(|v| v.checked_add(p_prev2)),
            ai.checked_mul(q_prev).and_then(|v| v.checked_add(q_prev2)),
        ) else {
            out.precision_limited = true;
            break;
        };
        out.quotients.push(ai);
        out.convergents.push((p, q));
        (p_prev2, q_prev2, p_prev, q_prev) = (p_prev, q_prev, p, q);

        let frac = x - a;
        if frac.hi().abs() <= eps {
            out.terminated = true;
            break;
        }
        if (q as f64) > MAX_RESOLVED_DENOMINATOR {
            out.precision_limited = true;
            break;
        }
        x = dd::recip(frac);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_is_all_ones() {
        let phi = (TwoFloat::from(1.0) + TwoFloat::from(5.0).sqrt()) * 0.5;
        let cf = continued_fraction_dd(phi, 25).unwrap();
        assert_eq!(cf.quotients.len(), 25);
        assert!(cf.quotients.iter().all(|&a| a == 1));
        // convergents are ratios of consecutive Fibonacci numbers
        let mut fib = vec![1i128, 1];
        for k in 2..30 {
            fib.push(fib[k - 1] + fib[k - 2]);
        }
        for (k, &(p, q)) in cf.convergents.iter().enumerate() {
            assert_eq!((p, q), (fib[k + 1], fib[k]));
        }
    }

    #[test]
    fn one_half_terminates() {
        let cf = continued_fraction(0.5, 10).unwrap();
        assert_eq!(cf.quotients, vec![0, 2]);
        assert!(cf.terminated);
        assert_eq!(cf.convergents.last(), Some(&(1, 2)));
    }

    #[test]
    fn convergents_bracket_the_slope() {
        let x = std::f64::consts::PI - 3.0;
        let cf = continued_fraction(x, 8).unwrap();
        for k in 0..cf.convergents.len() - 1 {
            let (p, q) = cf.convergents[k];
            let q_next = cf.convergents[k + 1].1;
            assert!((q as f64 * x - p as f64).abs() < 1.0 / q_next as f64);
        }
    }

    #[test]
    fn factorial_jump_in_liouville_truncation() {
        // Σ_{k≤4} 10^{-k!} = 0.110001 + 1e-24
        let l = dd::pow10_neg(1) + dd::pow10_neg(2) + dd::pow10_neg(6) + dd::pow10_neg(24);
        let cf = continued_fraction_dd(l, 12).unwrap();
        let big = cf.quotients.iter().copied().max().unwrap();
        assert!(big > 1_000_000_000, "quotients {:?}", cf.quotients);
        // the convergent just before the jump is 110001/10^6 in lowest terms
        let pos = cf.quotients.iter().position(|&a| a == big).unwrap();
        assert_eq!(cf.convergents[pos - 1], (110001, 1_000_000));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(continued_fraction(f64::NAN, 3).is_err());
        assert!(continued_fraction(0.3, 0).is_err());
    }
}
