//! Layered discretization shared by the rational-strip and regularized
//! quasiperiodic solvers: Fourier collocation along the tangential grid,
//! second-order differences in the normal variable `t`.
//!
//! The discrete operator is the Hessian of the energy
//! `Σ_edges Σ_endpoints (h/2)·gᵀB g + ι·(|∇_θ v|² + |∂_t v|²)` with
//! `g = (Dv, δv)`, `D` the tangential derivative at the endpoint level and
//! `δv` the edge difference quotient. Dirichlet data sit on level 0; the
//! Neumann condition at the top is the natural one.

use num_complex::Complex64;

use super::data::FourierBoundaryData;
use super::field::{GridField, TangentialGrid};
use crate::cell::{CoefficientField, Mat2};
use crate::error::{Error, Result};
use crate::geometry::{rationality_test, tangential_generator, NormalFrame, DEFAULT_RATIONAL_QMAX};
use crate::krylov::{bicgstab, pcg, solve_tridiagonal, KrylovOptions};
use crate::spectral::Spectral2;

/// Residual tolerance of the grid solvers (relative Euclidean residual).
pub const GRID_SOLVER_TOL: f64 = 1e-7;
const GRID_MAX_ITER: usize = 10_000;

/// Tangential nodes and normal intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StripGrid {
    pub n_tangential: usize,
    pub nt: usize,
}

struct LayerScheme {
    spec: Spectral2,
    p: usize,
    nt: usize,
    h: f64,
    /// Tangential derivative symbol (`D ↔ i·dsym`) per mode.
    dsym: Vec<f64>,
    /// `|k|²` per mode (for the ι-term).
    lap: Vec<f64>,
    iota: f64,
    /// `b[r][c][k*p + i]`: rotated coefficients at level `k`, node `i`.
    b: [[Vec<f64>; 2]; 2],
    symmetric: bool,
    bbar: [f64; 2],
}

impl LayerScheme {
    fn new(tangential: &TangentialGrid, nt: usize, t_max: f64, iota: f64, b_at: impl Fn(usize, usize) -> Mat2) -> Self {
        let spec = tangential.spectral();
        let p = tangential.len();
        let c = tangential.derivative_direction();
        let mut dsym = vec![0.0; p];
        let mut lap = vec![0.0; p];
        for i in 0..spec.n1 {
            for j in 0..spec.n2 {
                let (k1, k2) = (spec.k1[i], spec.k2[j]);
                dsym[i * spec.n2 + j] = c[0] * k1 + c[1] * k2;
                lap[i * spec.n2 + j] = k1 * k1 + k2 * k2;
            }
        }
        let mut b: [[Vec<f64>; 2]; 2] = Default::default();
        for row in b.iter_mut() {
            for e in row.iter_mut() {
                *e = vec![0.0; (nt + 1) * p];
            }
        }
        let mut symmetric = true;
        let mut sum = [0.0; 2];
        for k in 0..=nt {
            for i in 0..p {
                let m = b_at(k, i);
                let idx = k * p + i;
                for r in 0..2 {
                    for cc in 0..2 {
                        b[r][cc][idx] = m[r][cc];
                    }
                }
                symmetric &= m[0][1] == m[1][0];
                sum[0] += m[0][0];
                sum[1] += m[1][1];
            }
        }
        let cnt = ((nt + 1) * p) as f64;
        LayerScheme {
            spec,
            p,
            nt,
            h: t_max / nt as f64,
            dsym,
            lap,
            iota,
            b,
            symmetric,
            bbar: [sum[0] / cnt, sum[1] / cnt],
        }
    }

    fn edges_touching(&self, k: usize) -> f64 {
        if k == 0 || k == self.nt {
            1.0
        } else {
            2.0
        }
    }

    /// Operator on all levels `0..=nt`.
    fn apply_full(&self, v: &[f64], out: &mut [f64]) {
        let (p, nt, h) = (self.p, self.nt, self.h);
        let zero = Complex64::new(0.0, 0.0);
        let mut hats: Vec<Vec<Complex64>> = Vec::with_capacity(nt + 1);
        let mut dv = vec![0.0; (nt + 1) * p];
        for k in 0..=nt {
            let hat = self.spec.forward(&v[k * p..(k + 1) * p]);
            let d: Vec<Complex64> = hat.iter().zip(&self.dsym).map(|(c, &s)| c * Complex64::new(0.0, s)).collect();
            dv[k * p..(k + 1) * p].copy_from_slice(&self.spec.inverse_real(d));
            hats.push(hat);
        }
        let mut q1 = vec![0.0; (nt + 1) * p];
        out.iter_mut().for_each(|o| *o = 0.0);
        let half = 0.5 * h;
        for j in 0..nt {
            for e in [j, j + 1] {
                for i in 0..p {
                    let (lo, hi) = (j * p + i, (j + 1) * p + i);
                    let idx = e * p + i;
                    let g1 = dv[idx];
                    let g2 = (v[hi] - v[lo]) / h;
                    let f1 = self.b[0][0][idx] * g1 + self.b[0][1][idx] * g2;
                    let f2 = self.b[1][0][idx] * g1 + (self.b[1][1][idx] + self.iota) * g2;
                    q1[idx] += half * f1;
                    out[hi] += 0.5 * f2;
                    out[lo] -= 0.5 * f2;
                }
            }
        }
        for k in 0..=nt {
            let w = self.iota * half * self.edges_touching(k);
            let mut qh = self.spec.forward(&q1[k * p..(k + 1) * p]);
            for m in 0..p {
                qh[m] = qh[m] * Complex64::new(0.0, -self.dsym[m]) + hats[k][m] * (w * self.lap[m]);
            }
            if qh.iter().all(|c| *c == zero) {
                continue;
            }
            let t = self.spec.inverse_real(qh);
            for (o, x) in out[k * p..(k + 1) * p].iter_mut().zip(t) {
                *o += x;
            }
        }
    }

    /// Constant-coefficient (`B̄₁₁`, `B̄₂₂`, no cross term) inverse, per mode.
    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        let (p, nt, h) = (self.p, self.nt, self.h);
        let mut hats: Vec<Vec<Complex64>> = (0..nt).map(|k| self.spec.forward(&r[k * p..(k + 1) * p])).collect();
        let bt = self.bbar[1] + self.iota;
        let off = vec![-bt / h; nt];
        let mut diag = vec![0.0; nt];
        let mut col = vec![Complex64::new(0.0, 0.0); nt];
        for m in 0..p {
            let a = self.bbar[0] * self.dsym[m].powi(2) + self.iota * self.lap[m];
            for (k, d) in diag.iter_mut().enumerate() {
                let c = self.edges_touching(k + 1);
                *d = c * (0.5 * h * a + bt / h);
            }
            for k in 0..nt {
                col[k] = hats[k][m];
            }
            solve_tridiagonal(&off, &diag, &off, &mut col);
            for k in 0..nt {
                hats[k][m] = col[k];
            }
        }
        for (k, hat) in hats.into_iter().enumerate() {
            z[k * p..(k + 1) * p].copy_from_slice(&self.spec.inverse_real(hat));
        }
    }

    /// Solves with Dirichlet data `boundary` on level 0; returns all levels.
    fn solve(&self, boundary: &[f64]) -> Result<(Vec<f64>, f64, usize)> {
        let (p, nt) = (self.p, self.nt);
        let total = (nt + 1) * p;
        let mut full = vec![0.0; total];
        full[..p].copy_from_slice(boundary);
        let mut tmp = vec![0.0; total];
        self.apply_full(&full, &mut tmp);
        let b: Vec<f64> = tmp[p..].iter().map(|x| -x).collect();

        let apply = |u: &[f64], out: &mut [f64]| {
            let mut f = vec![0.0; total];
            f[p..].copy_from_slice(u);
            let mut o = vec![0.0; total];
            self.apply_full(&f, &mut o);
            out.copy_from_slice(&o[p..]);
        };
        let prec = |r: &[f64], z: &mut [f64]| self.precondition(r, z);
        let mut u = vec![0.0; nt * p];
        let opts = KrylovOptions {
            tol: 1e-3 * GRID_SOLVER_TOL,
            abs_floor: 0.0,
            max_iter: GRID_MAX_ITER,
        };
        let stats = if self.symmetric {
            pcg(apply, prec, &b, &mut u, opts)?
        } else {
            bicgstab(apply, prec, &b, &mut u, opts)?
        };
        let mut au = vec![0.0; nt * p];
        apply(&u, &mut au);
        let bn = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rn = b.iter().zip(&au).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let rel = if bn > 0.0 { rn / bn } else { rn };
        if rel > GRID_SOLVER_TOL {
            return Err(Error::NonConvergence {
                iterations: stats.iterations,
                residual: rel,
            });
        }
        full[p..].copy_from_slice(&u);
        Ok((full, rel, stats.iterations))
    }
}

/// `Mᵀ A M` for a 2D frame.
fn rotate(frame: &NormalFrame, a: &Mat2) -> Mat2 {
    let m = &frame.m;
    let mut out = [[0.0; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, o) in row.iter_mut().enumerate() {
            *o = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| m[i][r] * a[i][j] * m[j][c])
                .sum();
        }
    }
    out
}

/// Boundary-layer problem for a rational normal: periodic in the tangential
/// variable over one lattice period, `t ∈ [0, t_max]` above the boundary
/// `{y·n = a}`, Dirichlet data `v0(y)` at `t = 0`, Neumann at `t = t_max`.
pub fn solve_rational_strip(
    coeffs: &dyn CoefficientField,
    v0: &(dyn Fn([f64; 2]) -> f64 + Sync),
    frame: &NormalFrame,
    t_max: f64,
    grid: StripGrid,
) -> Result<GridField> {
    if frame.dim() != 2 {
        return Err(Error::invalid("strip solver is two-dimensional"));
    }
    let p = rationality_test(frame, DEFAULT_RATIONAL_QMAX)
        .ok_or_else(|| Error::invalid("normal is not rational (no integer direction with entries <= 1000)"))?;
    let g = tangential_generator(frame, &p);
    let period = ((g[0] * g[0] + g[1] * g[1]) as f64).sqrt();
    if !(t_max >= 5.0 * period) {
        return Err(Error::invalid(format!(
            "truncation height {t_max} is below five tangential periods ({})",
            5.0 * period
        )));
    }
    if grid.n_tangential < 4 || grid.nt < 2 {
        return Err(Error::invalid("strip grid too small"));
    }
    let tangential = TangentialGrid::Strip {
        period,
        n: grid.n_tangential,
    };
    let h = t_max / grid.nt as f64;
    let tan = frame.tangent(0);
    let point = |k: usize, i: usize| -> [f64; 2] {
        let s = i as f64 * period / grid.n_tangential as f64;
        let t = frame.a + k as f64 * h;
        [s * tan[0] + t * frame.n[0], s * tan[1] + t * frame.n[1]]
    };
    let scheme = LayerScheme::new(&tangential, grid.nt, t_max, 0.0, |k, i| {
        rotate(frame, &coeffs.eval_at(point(k, i)))
    });
    let boundary: Vec<f64> = (0..grid.n_tangential).map(|i| v0(point(0, i))).collect();
    let (values, residual, iterations) = scheme.solve(&boundary)?;
    Ok(GridField {
        frame: frame.clone(),
        tangential,
        t_max,
        nt: grid.nt,
        values,
        iota: 0.0,
        residual,
        tolerance: GRID_SOLVER_TOL,
        iterations,
    })
}

/// Regularized lifted problem on `T² × [0, t_max]`:
/// `−(D, ∂_t)·B(D, ∂_t)V − ι(Δ_θ + ∂_t²)V = 0` with `D = Nᵀ∇_θ`,
/// `B(θ,t) = MᵀA(θ + (a+t)n)M`, `V = V₀(· + a n)` at `t = 0`, Neumann on top.
/// `iota = None` selects `ι = h²` with `h` the coarser grid spacing.
pub fn solve_quasiperiodic_regularized(
    coeffs: &dyn CoefficientField,
    v0: &FourierBoundaryData,
    frame: &NormalFrame,
    iota: Option<f64>,
    t_max: f64,
    grid: StripGrid,
) -> Result<GridField> {
    if frame.dim() != 2 {
        return Err(Error::invalid("quasiperiodic solver is two-dimensional"));
    }
    if !(t_max > 0.0) {
        return Err(Error::invalid("truncation height must be positive"));
    }
    let n = grid.n_tangential;
    if n < 4 || grid.nt < 2 {
        return Err(Error::invalid("torus grid too small"));
    }
    let h = t_max / grid.nt as f64;
    let iota = iota.unwrap_or_else(|| h.max(1.0 / n as f64).powi(2));
    if !(iota > 0.0) {
        return Err(Error::invalid(
            "regularization iota must be positive: the unregularized lifted operator is not elliptic",
        ));
    }
    let tan = frame.tangent(0);
    let tangential = TangentialGrid::Torus {
        n,
        direction: [tan[0], tan[1]],
    };
    let a = frame.a;
    let nv = [frame.n[0], frame.n[1]];
    let scheme = LayerScheme::new(&tangential, grid.nt, t_max, iota, |k, idx| {
        let th = [(idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64];
        let s = a + k as f64 * h;
        rotate(frame, &coeffs.eval_at([th[0] + s * nv[0], th[1] + s * nv[1]]))
    });
    let data = v0.shifted([a * nv[0], a * nv[1]]);
    let boundary: Vec<f64> = (0..n * n)
        .map(|idx| data.eval([(idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64]))
        .collect();
    let (values, residual, iterations) = scheme.solve(&boundary)?;
    Ok(GridField {
        frame: frame.clone(),
        tangential,
        t_max,
        nt: grid.nt,
        values,
        iota,
        residual,
        tolerance: GRID_SOLVER_TOL,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blsolver::field::solve_series_laplacian;
    use crate::cell::CoefficientModel;
    use crate::geometry::{build_frame, golden_frame};
    use std::f64::consts::PI;

    fn axis() -> NormalFrame {
        build_frame(&[0.0, 1.0], 0.0).unwrap()
    }

    #[test]
    fn harmonic_extension_of_a_sine() {
        let f = solve_rational_strip(
            &CoefficientModel::Identity,
            &|y| (2.0 * PI * y[0]).sin(),
            &axis(),
            6.0,
            StripGrid { n_tangential: 64, nt: 512 },
        )
        .unwrap();
        let mut err: f64 = 0.0;
        for k in 0..=f.nt {
            let t = f.t_of(k);
            for (i, v) in f.level(k).iter().enumerate() {
                let z1 = i as f64 / 64.0;
                err = err.max((v - (-2.0 * PI * t).exp() * (2.0 * PI * z1).sin()).abs());
            }
        }
        assert!(err < 1e-4, "sup error {err}");
        assert!(f.max_principle_violation() < 1e-12);
    }

    #[test]
    fn constants_are_reproduced() {
        let f = solve_rational_strip(
            &CoefficientModel::standard_layered(),
            &|_| 1.0,
            &axis(),
            5.0,
            StripGrid { n_tangential: 16, nt: 64 },
        )
        .unwrap();
        assert!(f.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
        let q = solve_quasiperiodic_regularized(
            &CoefficientModel::Identity,
            &FourierBoundaryData::constant(2.0),
            &golden_frame(0.0),
            Some(1e-2),
            2.0,
            StripGrid { n_tangential: 8, nt: 16 },
        )
        .unwrap();
        assert!(q.values.iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn rejects_irrational_and_short_strips() {
        let g = golden_frame(0.0);
        let grid = StripGrid { n_tangential: 16, nt: 32 };
        assert!(solve_rational_strip(&CoefficientModel::Identity, &|_| 0.0, &g, 6.0, grid).is_err());
        assert!(solve_rational_strip(&CoefficientModel::Identity, &|_| 0.0, &axis(), 4.0, grid).is_err());
    }

    #[test]
    fn iota_must_be_positive() {
        let r = solve_quasiperiodic_regularized(
            &CoefficientModel::Identity,
            &FourierBoundaryData::constant(1.0),
            &golden_frame(0.0),
            Some(0.0),
            1.0,
            StripGrid { n_tangential: 8, nt: 8 },
        );
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn diagonal_rational_direction() {
        // n = (1,1)/√2: the tangential period is √2, and the mode cos(2π(y₁−y₂))
        // has |Nᵀξ| = √2, decaying like e^{−2π√2 t}
        let frame = build_frame(&[1.0, 1.0], 0.0).unwrap();
        let f = solve_rational_strip(
            &CoefficientModel::Identity,
            &|y| (2.0 * PI * (y[0] - y[1])).cos(),
            &frame,
            8.0,
            StripGrid { n_tangential: 32, nt: 1024 },
        )
        .unwrap();
        let series = solve_series_laplacian(&FourierBoundaryData::cosine([1, -1], 1.0), &frame).unwrap();
        for &(s, t) in &[(0.3, 0.2), (1.0, 0.5)] {
            let grid = f.eval(&[s], t).unwrap();
            let exact = series.eval_physical(s, t);
            assert!((grid - exact).abs() < 5e-3, "{grid} {exact}");
        }
    }

    #[test]
    fn regularized_single_mode_approaches_series() {
        let frame = golden_frame(0.0);
        let v0 = FourierBoundaryData::cosine([1, 0], 1.0);
        let exact = (-2.0 * PI * frame.tangential_norm(&[1, 0])).exp();
        let mut errs = Vec::new();
        for iota in [1e-1, 1e-2, 1e-3] {
            let f = solve_quasiperiodic_regularized(
                &CoefficientModel::Identity,
                &v0,
                &frame,
                Some(iota),
                4.0,
                StripGrid { n_tangential: 16, nt: 400 },
            )
            .unwrap();
            let v = f.eval(&[0.0, 0.0], 1.0).unwrap();
            errs.push((v - exact).abs());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 1e-2);
    }
}
