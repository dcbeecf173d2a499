use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::data::FourierBoundaryData;
use crate::error::{Error, Result};
use crate::geometry::NormalFrame;
use crate::spectral::Spectral2;

/// One term `v̂₀(ξ) e^{−rate·t} e^{2πiξ·θ}` of a series field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesMode {
    pub xi: [i64; 2],
    pub coef: Complex64,
    /// `|Nᵀξ|`.
    pub abs_ndot_xi: f64,
    /// `2π|Nᵀξ|`.
    pub rate: f64,
}

/// Exact solution of the Laplacian boundary-layer problem lifted to `T²×[0,∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesField {
    pub frame: NormalFrame,
    pub modes: Vec<SeriesMode>,
}

/// Tangential discretization of a grid field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TangentialGrid {
    /// `n` nodes on one tangential period `[0, period)` of a rational frame.
    Strip { period: f64, n: usize },
    /// `n × n` nodes on the torus `[0,1)²`; `direction` is the tangential
    /// column of `M`, so the tangential derivative is `direction·∇_θ`.
    Torus { n: usize, direction: [f64; 2] },
}

impl TangentialGrid {
    pub fn len(&self) -> usize {
        match *self {
            TangentialGrid::Strip { n, .. } => n,
            TangentialGrid::Torus { n, .. } => n * n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn spectral(&self) -> Spectral2 {
        match *self {
            TangentialGrid::Strip { period, n } => Spectral2::new(n, 1, [period, 1.0]),
            TangentialGrid::Torus { n, .. } => Spectral2::unit(n),
        }
    }

    /// Coefficients `c` of the tangential derivative `c₁∂₁ + c₂∂₂` on the grid.
    pub(crate) fn derivative_direction(&self) -> [f64; 2] {
        match *self {
            TangentialGrid::Strip { .. } => [1.0, 0.0],
            TangentialGrid::Torus { direction, .. } => direction,
        }
    }

    /// Coordinates of tangential node `idx` (one entry for strips, two for tori).
    pub fn node(&self, idx: usize) -> Vec<f64> {
        match *self {
            TangentialGrid::Strip { period, n } => vec![idx as f64 * period / n as f64],
            TangentialGrid::Torus { n, .. } => {
                vec![(idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64]
            }
        }
    }
}

/// Numerical solution on (tangential grid) × `[0, t_max]`, stored level by level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub frame: NormalFrame,
    pub tangential: TangentialGrid,
    pub t_max: f64,
    /// Number of intervals in `t`; there are `nt + 1` levels.
    pub nt: usize,
    /// `values[k * tangential.len() + i]` at level `k`, node `i`.
    pub values: Vec<f64>,
    /// Regularization used (`0` for the strip solver).
    pub iota: f64,
    /// Relative residual of the final linear solve.
    pub residual: f64,
    /// Residual tolerance the solve was run to.
    pub tolerance: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BoundaryLayerField {
    Series(SeriesField),
    Grid(GridField),
}

/// `K(T)` with a bound on the part not captured by the representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StVenantEnergy {
    pub t: f64,
    pub value: f64,
    /// Zero for series fields; for grid fields, an exponential extrapolation
    /// of the energy above the truncation height (infinite if not decaying).
    pub remainder_bound: f64,
}

/// Slab diagnostics of `V − tail` at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabNorm {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
}

impl SeriesField {
    pub fn eval(&self, theta: [f64; 2], t: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let ph = 2.0 * PI * (m.xi[0] as f64 * theta[0] + m.xi[1] as f64 * theta[1]);
                (m.coef.re * ph.cos() - m.coef.im * ph.sin()) * (-m.rate * t).exp()
            })
            .sum()
    }

    /// `v̂₀(0)`.
    pub fn mean(&self) -> f64 {
        self.modes
            .iter()
            .find(|m| m.xi == [0, 0])
            .map_or(0.0, |m| m.coef.re)
    }

    /// `‖V(·,t) − v̂₀(0)‖_{L²(T²)}` by Parseval.
    pub fn l2_fluctuation(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.xi != [0, 0])
            .map(|m| m.coef.norm_sqr() * (-2.0 * m.rate * t).exp())
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ_{ξ≠0} |v̂₀(ξ)| e^{−rate·t}`, a bound on `sup_θ |V(θ,t) − v̂₀(0)|`.
    pub fn linf_bound(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.xi != [0, 0])
            .map(|m| m.coef.norm() * (-m.rate * t).exp())
            .sum()
    }

    /// Smallest positive rate.
    pub fn min_rate(&self) -> Option<f64> {
        self.modes
            .iter()
            .map(|m| m.rate)
            .filter(|&r| r > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Limit of `v` far from the boundary `{y·n = a}`: the non-decaying modes
    /// evaluated on the boundary line. For irrational frames only `ξ = 0`
    /// survives and this is `v̂₀(0)`.
    pub fn tail(&self) -> f64 {
        let (n, a) = (&self.frame.n, self.frame.a);
        self.modes
            .iter()
            .filter(|m| m.rate == 0.0)
            .map(|m| {
                let ph = 2.0 * PI * a * (m.xi[0] as f64 * n[0] + m.xi[1] as f64 * n[1]);
                (m.coef * Complex64::from_polar(1.0, ph)).re
            })
            .sum()
    }

    /// `V` restricted to the physical half-plane: `v(s, t)` at tangential
    /// coordinate `s` and distance `t` from the boundary.
    pub fn eval_physical(&self, s: f64, t: f64) -> f64 {
        let p = self.frame.boundary_point(&[s]);
        self.eval([p[0], p[1]], t)
    }

    pub fn st_venant(&self, t: f64) -> f64 {
        self.modes
            .iter()
            .filter(|m| m.xi != [0, 0])
            .map(|m| m.coef.norm_sqr() * m.rate * (-2.0 * m.rate * t).exp())
            .sum()
    }
}

impl GridField {
    pub fn levels(&self) -> usize {
        self.nt + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.nt as f64
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let p = self.tangential.len();
        &self.values[k * p..(k + 1) * p]
    }

    pub fn t_of(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Interpolated value (periodic-linear tangentially, linear in `t`).
    pub fn eval(&self, pos: &[f64], t: f64) -> Result<f64> {
        if !(0.0..=self.t_max * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::OutOfRange(format!("t = {t} outside [0, {}]", self.t_max)));
        }
        let s = (t / self.dt()).min(self.nt as f64);
        let k0 = (s.floor() as usize).min(self.nt);
        let k1 = (k0 + 1).min(self.nt);
        let ft = s - k0 as f64;
        let at_level = |k: usize| -> Result<f64> {
            let lv = self.level(k);
            match self.tangential {
                TangentialGrid::Strip { period, n } => {
                    let x = pos.first().copied().ok_or_else(|| Error::invalid("missing coordinate"))?;
                    let u = (x / period).rem_euclid(1.0) * n as f64;
                    let i0 = u.floor() as usize % n;
                    let f = u - u.floor();
                    Ok((1.0 - f) * lv[i0] + f * lv[(i0 + 1) % n])
                }
                TangentialGrid::Torus { n, .. } => {
                    if pos.len() < 2 {
                        return Err(Error::invalid("torus fields need two angles"));
                    }
                    let (u, v) = (pos[0].rem_euclid(1.0) * n as f64, pos[1].rem_euclid(1.0) * n as f64);
                    let (i0, j0) = (u.floor() as usize % n, v.floor() as usize % n);
                    let (fu, fv) = (u - u.floor(), v - v.floor());
                    let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
                    Ok((1.0 - fu) * ((1.0 - fv) * lv[i0 * n + j0] + fv * lv[i0 * n + j1])
                        + fu * ((1.0 - fv) * lv[i1 * n + j0] + fv * lv[i1 * n + j1]))
                }
            }
        };
        Ok((1.0 - ft) * at_level(k0)? + ft * at_level(k1)?)
    }

    /// Mean and oscillation (max − min) of `V` over the top 10% of levels.
    pub fn top_slab(&self) -> (f64, f64) {
        let first = self.levels() - (self.levels() / 10).max(1);
        let p = self.tangential.len();
        let vals = &self.values[first * p..];
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        (mean, hi - lo)
    }

    /// `(t, ‖V(·,t) − tail‖_{L²}, ‖V(·,t) − tail‖_∞)` for every level, the
    /// `L²` norm taken with unit tangential measure.
    pub fn slab_norms(&self, tail: f64) -> Vec<SlabNorm> {
        (0..self.levels())
            .map(|k| {
                let lv = self.level(k);
                let l2 = (lv.iter().map(|v| (v - tail).powi(2)).sum::<f64>() / lv.len() as f64).sqrt();
                let linf = lv.iter().map(|v| (v - tail).abs()).fold(0.0, f64::max);
                SlabNorm { t: self.t_of(k), l2, linf }
            })
            .collect()
    }

    /// Tangential derivative of every level.
    fn tangential_derivatives(&self) -> Vec<Vec<f64>> {
        let spec = self.tangential.spectral();
        let c = self.tangential.derivative_direction();
        (0..self.levels()).map(|k| spec.directional(self.level(k), c)).collect()
    }

    /// `sup |∇V|` (tangential and normal parts) over each level.
    pub fn gradient_sup_per_level(&self) -> Vec<f64> {
        let dv = self.tangential_derivatives();
        let h = self.dt();
        (0..self.levels())
            .map(|k| {
                let (a, b) = if k == 0 { (0, 1) } else if k == self.nt { (k - 1, k) } else { (k - 1, k + 1) };
                let span = (b - a) as f64 * h;
                let (la, lb) = (self.level(a), self.level(b));
                (0..la.len())
                    .map(|i| (dv[k][i].powi(2) + ((lb[i] - la[i]) / span).powi(2)).sqrt())
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Per-edge tangential-mean energy density `(|DV|² + |∂_tV|²)` with the
    /// tangential term averaged over the two endpoints.
    fn edge_densities(&self) -> Vec<f64> {
        let dv = self.tangential_derivatives();
        let h = self.dt();
        let p = self.tangential.len() as f64;
        (0..self.nt)
            .map(|j| {
                let (l0, l1) = (self.level(j), self.level(j + 1));
                let tang = 0.5 * (dv[j].iter().map(|x| x * x).sum::<f64>() + dv[j + 1].iter().map(|x| x * x).sum::<f64>());
                let norm: f64 = l0.iter().zip(l1).map(|(a, b)| ((b - a) / h).powi(2)).sum();
                (tang + norm) / p
            })
            .collect()
    }

    pub fn st_venant(&self, t: f64) -> Result<StVenantEnergy> {
        if !(0.0..=self.t_max).contains(&t) {
            return Err(Error::OutOfRange(format!("T = {t} outside [0, {}]", self.t_max)));
        }
        let h = self.dt();
        let dens = self.edge_densities();
        let mut value = 0.0;
        for (j, e) in dens.iter().enumerate() {
            let (lo, hi) = (j as f64 * h, (j + 1) as f64 * h);
            let overlap = (hi - lo.max(t)).max(0.0);
            value += e * overlap;
        }
        let remainder_bound = match dens.len() {
            0 | 1 => f64::INFINITY,
            n => {
                let (a, b) = (dens[n - 2], dens[n - 1]);
                if b == 0.0 {
                    0.0
                } else if a > b {
                    b * h / (a / b).ln()
                } else {
                    f64::INFINITY
                }
            }
        };
        Ok(StVenantEnergy { t, value, remainder_bound })
    }

    /// Largest distance below `min v₀` or above `max v₀` (taken over the
    /// boundary level) among all nodes.
    pub fn max_principle_violation(&self) -> f64 {
        let b = self.level(0);
        let (lo, hi) = b
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        self.values
            .iter()
            .map(|&v| (lo - v).max(v - hi).max(0.0))
            .fold(0.0, f64::max)
    }
}

impl BoundaryLayerField {
    /// `V(θ, t)`: `pos` is a torus angle for series and torus grids, a
    /// tangential coordinate for strips.
    pub fn evaluate(&self, pos: &[f64], t: f64) -> Result<f64> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::OutOfRange(format!("t = {t} must be a finite nonnegative height")));
        }
        match self {
            BoundaryLayerField::Series(s) => {
                if pos.len() < 2 {
                    return Err(Error::invalid("series fields are evaluated at torus angles"));
                }
                Ok(s.eval([pos[0], pos[1]], t))
            }
            BoundaryLayerField::Grid(g) => g.eval(pos, t),
        }
    }

    pub fn frame(&self) -> &NormalFrame {
        match self {
            BoundaryLayerField::Series(s) => &s.frame,
            BoundaryLayerField::Grid(g) => &g.frame,
        }
    }
}

/// Exact series solution for `A = Id`: each mode decays at `2π|Nᵀξ|`.
pub fn solve_series_laplacian(v0: &FourierBoundaryData, frame: &NormalFrame) -> Result<SeriesField> {
    if frame.dim() != 2 {
        return Err(Error::invalid("series solver is two-dimensional"));
    }
    let modes = v0
        .iter()
        .map(|(xi, coef)| {
            let abs_ndot_xi = if xi == [0, 0] { 0.0 } else { frame.tangential_norm(&xi) };
            SeriesMode {
                xi,
                coef,
                abs_ndot_xi,
                rate: 2.0 * PI * abs_ndot_xi,
            }
        })
        .collect();
    Ok(SeriesField {
        frame: frame.clone(),
        modes,
    })
}

/// `K(T) = ∫_{T²}∫_T^∞ (|Nᵀ∇_θV|² + |∂_tV|²)`.
pub fn st_venant_energy(field: &BoundaryLayerField, t: f64) -> Result<StVenantEnergy> {
    if t < 0.0 {
        return Err(Error::OutOfRange(format!("T = {t} is negative")));
    }
    match field {
        BoundaryLayerField::Series(s) => Ok(StVenantEnergy {
            t,
            value: s.st_venant(t),
            remainder_bound: 0.0,
        }),
        BoundaryLayerField::Grid(g) => g.st_venant(t),
    }
}
