use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

/// Closed-form 1-periodic coefficient fields `A(y)`, scalar case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientModel {
    Identity,
    /// `c·Id`.
    Scaled { value: f64 },
    /// `(mean + amplitude·cos(2π y_axis))·Id`, a laminate across `axis` (0 or 1).
    Layered {
        mean: f64,
        amplitude: f64,
        #[serde(default)]
        axis: usize,
    },
    /// `(mean + amplitude·sin(2πy₁)sin(2πy₂))·Id`.
    Checkerboard { mean: f64, amplitude: f64 },
    /// Full symmetric matrix field with trigonometric entries, plus an optional
    /// antisymmetric part `skew·cos(2πy₂)·[[0,1],[-1,0]]`.
    Anisotropic {
        #[serde(default)]
        skew: f64,
    },
}

impl CoefficientModel {
    /// The laminate `2 + cos(2πy₁)` used throughout the examples.
    pub fn standard_layered() -> Self {
        CoefficientModel::Layered {
            mean: 2.0,
            amplitude: 1.0,
            axis: 0,
        }
    }

    pub fn eval(&self, y: [f64; 2]) -> Mat2 {
        let iso = |a: f64| [[a, 0.0], [0.0, a]];
        match *self {
            CoefficientModel::Identity => iso(1.0),
            CoefficientModel::Scaled { value } => iso(value),
            CoefficientModel::Layered { mean, amplitude, axis } => {
                iso(mean + amplitude * (2.0 * PI * y[axis.min(1)]).cos())
            }
            CoefficientModel::Checkerboard { mean, amplitude } => {
                iso(mean + amplitude * (2.0 * PI * y[0]).sin() * (2.0 * PI * y[1]).sin())
            }
            CoefficientModel::Anisotropic { skew } => {
                let (s1, s2) = ((2.0 * PI * y[0]).sin(), (2.0 * PI * y[1]).sin());
                let a11 = 2.0 + 0.5 * (2.0 * PI * y[0]).cos();
                let a22 = 1.5 + 0.4 * s2;
                let a12 = 0.3 * (2.0 * PI * (y[0] + y[1])).sin() + 0.1 * s1 * s2;
                let k = skew * (2.0 * PI * y[1]).cos();
                [[a11, a12 + k], [a12 - k, a22]]
            }
        }
    }

    /// Whether `A(y)` is a constant matrix.
    pub fn is_constant(&self) -> bool {
        match *self {
            CoefficientModel::Identity | CoefficientModel::Scaled { .. } => true,
            CoefficientModel::Layered { amplitude, .. } | CoefficientModel::Checkerboard { amplitude, .. } => {
                amplitude == 0.0
            }
            CoefficientModel::Anisotropic { .. } => false,
        }
    }

    pub fn is_identity(&self) -> bool {
        match *self {
            CoefficientModel::Identity => true,
            CoefficientModel::Scaled { value } => value == 1.0,
            _ => false,
        }
    }
}

/// Anything that can be evaluated as a 1-periodic coefficient field.
pub trait CoefficientField: Sync {
    fn eval_at(&self, y: [f64; 2]) -> Mat2;
}

impl CoefficientField for CoefficientModel {
    fn eval_at(&self, y: [f64; 2]) -> Mat2 {
        self.eval(y)
    }
}

/// `Aᵀ` of another field.
pub struct Transposed<'a>(pub &'a dyn CoefficientField);

impl CoefficientField for Transposed<'_> {
    fn eval_at(&self, y: [f64; 2]) -> Mat2 {
        let a = self.0.eval_at(y);
        [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
    }
}

/// Periodic bilinear interpolation of the samples.
impl CoefficientField for PeriodicCoefficients {
    fn eval_at(&self, y: [f64; 2]) -> Mat2 {
        let n = self.grid;
        let (u, v) = (y[0].rem_euclid(1.0) * n as f64, y[1].rem_euclid(1.0) * n as f64);
        let (i0, j0) = (u.floor() as usize % n, v.floor() as usize % n);
        let (fu, fv) = (u - u.floor(), v - v.floor());
        let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
        let mut out = [[0.0; 2]; 2];
        for (al, row) in out.iter_mut().enumerate() {
            for (be, o) in row.iter_mut().enumerate() {
                let e = &self.entries[al][be];
                *o = (1.0 - fu) * ((1.0 - fv) * e[i0 * n + j0] + fv * e[i0 * n + j1])
                    + fu * ((1.0 - fv) * e[i1 * n + j0] + fv * e[i1 * n + j1]);
            }
        }
        out
    }
}

/// Grid samples of `A(y)` on `[0,1)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCoefficients {
    pub d: usize,
    pub grid: usize,
    /// `entries[α][β][i*grid + j]` = `A^{αβ}` at node `(i, j)`.
    pub entries: [[Vec<f64>; 2]; 2],
    pub lambda: f64,
}

/// Largest λ with `λ|ζ|² ≤ ζ·Aζ ≤ λ⁻¹|ζ|²` for all ζ, for one matrix.
fn ellipticity_of(a: &Mat2) -> f64 {
    let s12 = 0.5 * (a[0][1] + a[1][0]);
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - s12 * s12;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let (lo, hi) = (0.5 * tr - disc, 0.5 * tr + disc);
    lo.min(1.0 / hi)
}

impl PeriodicCoefficients {
    pub fn from_model(model: &CoefficientModel, grid: usize) -> Result<Self> {
        Self::sample(model, grid)
    }

    /// Samples any coefficient field on the `grid × grid` nodes of `[0,1)²`.
    pub fn sample(model: &dyn CoefficientField, grid: usize) -> Result<Self> {
        if grid < 2 || !grid.is_power_of_two() {
            return Err(Error::invalid(format!("grid {grid} must be a power of two")));
        }
        let h = 1.0 / grid as f64;
        let samples: Vec<Mat2> = (0..grid * grid)
            .map(|idx| model.eval_at([(idx / grid) as f64 * h, (idx % grid) as f64 * h]))
            .collect();
        Self::from_samples(grid, &samples)
    }

    pub fn from_samples(grid: usize, samples: &[Mat2]) -> Result<Self> {
        if samples.len() != grid * grid {
            return Err(Error::invalid("sample count does not match grid"));
        }
        if samples.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("coefficient samples must be finite"));
        }
        let mut entries: [[Vec<f64>; 2]; 2] = Default::default();
        for (al, row) in entries.iter_mut().enumerate() {
            for (be, e) in row.iter_mut().enumerate() {
                *e = samples.iter().map(|m| m[al][be]).collect();
            }
        }
        let lambda = samples.iter().map(ellipticity_of).fold(f64::INFINITY, f64::min);
        if !(lambda > 0.0) {
            return Err(Error::invalid("coefficients are not uniformly elliptic"));
        }
        Ok(PeriodicCoefficients {
            d: 2,
            grid,
            entries,
            lambda,
        })
    }

    pub fn at(&self, idx: usize) -> Mat2 {
        [
            [self.entries[0][0][idx], self.entries[0][1][idx]],
            [self.entries[1][0][idx], self.entries[1][1][idx]],
        ]
    }

    pub fn transposed(&self) -> Self {
        let e = &self.entries;
        PeriodicCoefficients {
            entries: [[e[0][0].clone(), e[1][0].clone()], [e[0][1].clone(), e[1][1].clone()]],
            ..self.clone()
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries[0][1] == self.entries[1][0]
    }

    pub fn mean(&self) -> Mat2 {
        let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        [
            [m(&self.entries[0][0]), m(&self.entries[0][1])],
            [m(&self.entries[1][0]), m(&self.entries[1][1])],
        ]
    }

    /// Largest entry magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Sampled check of the two-sided ellipticity bound on `e₁`, `e₂`, `e₁+e₂`.
    pub fn check_ellipticity(&self) -> bool {
        let tests: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        (0..self.grid * self.grid).all(|idx| {
            let a = self.at(idx);
            tests.iter().all(|z| {
                let q = z[0] * (a[0][0] * z[0] + a[0][1] * z[1]) + z[1] * (a[1][0] * z[0] + a[1][1] * z[1]);
                let n2 = z[0] * z[0] + z[1] * z[1];
                q >= self.lambda * n2 * (1.0 - 1e-12) && q <= n2 / self.lambda * (1.0 + 1e-12)
            })
        })
    }
}
