use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the Hermitian symmetry check.
const HERMITIAN_TOL: f64 = 1e-12;

/// Finitely supported Fourier data `ξ ↦ v̂₀(ξ)` of a real function on `T²`,
/// `v₀(θ) = Σ v̂₀(ξ) e^{2πiξ·θ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ModeEntry>", into = "Vec<ModeEntry>")]
pub struct FourierBoundaryData {
    modes: BTreeMap<[i64; 2], Complex64>,
}

/// Serialized form of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub xi: [i64; 2],
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl TryFrom<Vec<ModeEntry>> for FourierBoundaryData {
    type Error = Error;

    fn try_from(v: Vec<ModeEntry>) -> Result<Self> {
        FourierBoundaryData::new(v.into_iter().map(|e| (e.xi, Complex64::new(e.re, e.im))))
    }
}

impl From<FourierBoundaryData> for Vec<ModeEntry> {
    fn from(d: FourierBoundaryData) -> Self {
        d.modes
            .iter()
            .map(|(&xi, c)| ModeEntry { xi, re: c.re, im: c.im })
            .collect()
    }
}

impl FourierBoundaryData {
    /// Builds the data, merging repeated modes and dropping exact zeros.
    /// Fails unless `v̂₀(−ξ) = conj v̂₀(ξ)`.
    pub fn new(modes: impl IntoIterator<Item = ([i64; 2], Complex64)>) -> Result<Self> {
        let mut map: BTreeMap<[i64; 2], Complex64> = BTreeMap::new();
        for (xi, c) in modes {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid(format!("mode {xi:?} has a non-finite coefficient")));
            }
            *map.entry(xi).or_default() += c;
        }
        map.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        let scale = map.values().map(|c| c.norm()).fold(0.0, f64::max);
        for (xi, c) in &map {
            let partner = map.get(&[-xi[0], -xi[1]]).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::invalid(format!(
                    "data is not real: coefficient of {:?} is not the conjugate of that of {xi:?}",
                    [-xi[0], -xi[1]]
                )));
            }
        }
        Ok(FourierBoundaryData { modes: map })
    }

    pub fn zero() -> Self {
        FourierBoundaryData { modes: BTreeMap::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new([([0, 0], Complex64::new(c, 0.0))]).expect("real constant")
    }

    /// `amp·cos(2πξ·θ)`.
    pub fn cosine(xi: [i64; 2], amp: f64) -> Self {
        if xi == [0, 0] {
            return Self::constant(amp);
        }
        let c = Complex64::new(0.5 * amp, 0.0);
        Self::new([(xi, c), ([-xi[0], -xi[1]], c)]).expect("cosine pair is Hermitian")
    }

    /// `amp·sin(2πξ·θ)`.
    pub fn sine(xi: [i64; 2], amp: f64) -> Self {
        if xi == [0, 0] {
            return Self::zero();
        }
        let c = Complex64::new(0.0, -0.5 * amp);
        Self::new([(xi, c), ([-xi[0], -xi[1]], c.conj())]).expect("sine pair is Hermitian")
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::new(self.iter().chain(other.iter())).expect("sum of real data is real")
    }

    pub fn iter(&self) -> impl Iterator<Item = ([i64; 2], Complex64)> + '_ {
        self.modes.iter().map(|(&xi, &c)| (xi, c))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn coefficient(&self, xi: [i64; 2]) -> Complex64 {
        self.modes.get(&xi).copied().unwrap_or_default()
    }

    /// `v̂₀(0)`.
    pub fn mean(&self) -> f64 {
        self.coefficient([0, 0]).re
    }

    /// Largest `|ξ|` in the support.
    pub fn max_norm(&self) -> f64 {
        self.modes
            .keys()
            .map(|xi| ((xi[0] * xi[0] + xi[1] * xi[1]) as f64).sqrt())
            .fold(0.0, f64::max)
    }

    /// `Σ_{ξ≠0} |v̂₀(ξ)|²`, the squared `L²(T²)` distance to the mean.
    pub fn fluctuation_energy(&self) -> f64 {
        self.iter().filter(|(xi, _)| *xi != [0, 0]).map(|(_, c)| c.norm_sqr()).sum()
    }

    pub fn eval(&self, theta: [f64; 2]) -> f64 {
        self.iter()
            .map(|(xi, c)| {
                let ph = 2.0 * PI * (xi[0] as f64 * theta[0] + xi[1] as f64 * theta[1]);
                c.re * ph.cos() - c.im * ph.sin()
            })
            .sum()
    }

    /// Data of `θ ↦ v₀(θ + s)`: each coefficient picks up `e^{2πiξ·s}`.
    pub fn shifted(&self, s: [f64; 2]) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(&xi, &c)| {
                let ph = 2.0 * PI * (xi[0] as f64 * s[0] + xi[1] as f64 * s[1]);
                (xi, c * Complex64::from_polar(1.0, ph))
            })
            .collect();
        FourierBoundaryData { modes }
    }

    /// Bounds `Σ|v̂₀(ξ)|` on `|v₀ − v̂₀(0)|`, used for maximum-principle margins.
    pub fn fluctuation_l1(&self) -> f64 {
        self.iter().filter(|(xi, _)| *xi != [0, 0]).map(|(_, c)| c.norm()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_and_sine_evaluate() {
        let c = FourierBoundaryData::cosine([1, 0], 1.0);
        assert_eq!(c.coefficient([1, 0]), Complex64::new(0.5, 0.0));
        let s = FourierBoundaryData::sine([0, 2], 3.0);
        for th in [[0.1, 0.2], [0.7, 0.33]] {
            assert!((c.eval(th) - (2.0 * PI * th[0]).cos()).abs() < 1e-15);
            assert!((s.eval(th) - 3.0 * (4.0 * PI * th[1]).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let r = FourierBoundaryData::new([([1, 0], Complex64::new(1.0, 0.0))]);
        assert!(r.is_err());
    }

    #[test]
    fn shift_matches_translation() {
        let d = FourierBoundaryData::cosine([2, 1], 1.0).plus(&FourierBoundaryData::sine([0, 3], 0.5));
        let s = [0.13, 0.41];
        let sh = d.shifted(s);
        let th = [0.3, 0.9];
        assert!((sh.eval(th) - d.eval([th[0] + s[0], th[1] + s[1]])).abs() < 1e-14);
        assert_eq!(sh.mean(), d.mean());
    }

    #[test]
    fn json_roundtrip_is_strict() {
        let d = FourierBoundaryData::cosine([1, 1], 2.0).plus(&FourierBoundaryData::constant(0.5));
        let js = serde_json::to_string(&d).unwrap();
        let back: FourierBoundaryData = serde_json::from_str(&js).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<FourierBoundaryData>(r#"[{"xi":[1,0],"re":1}]"#).is_err());
        assert!(serde_json::from_str::<FourierBoundaryData>(r#"[{"xi":[0,0],"re":1,"x":0}]"#).is_err());
    }
}
