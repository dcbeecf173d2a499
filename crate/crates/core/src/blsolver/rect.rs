//! Dirichlet problems `−∇·A(x/ε)∇u = f` on a square, used to measure the
//! homogenization error `u^ε − u⁰` away from the boundary.
//!
//! Each cell carries `A` at its center and contributes `(h²/4)Σ gᵀA g` over
//! its four corners, `g` being the one-sided gradient along the two cell
//! edges meeting at that corner. For diagonal `A` this is the usual
//! five-point scheme with edge-averaged coefficients.

use serde::{Deserialize, Serialize};

use crate::cell::{homogenized_tensor, solve_corrector, CoefficientField, Mat2, PeriodicCoefficients};
#[cfg(test)]
use crate::cell::Transposed;
use crate::error::{Error, Result};
use crate::krylov::{bicgstab, pcg, KrylovOptions};
use crate::spectral::Dst1;

/// Minimum mesh cells per ε-period.
pub const MIN_CELLS_PER_PERIOD: f64 = 8.0;
/// Cell-problem resolution used for `A0`.
const CELL_GRID: usize = 64;
const RECT_TOL: f64 = 1e-10;

/// `[0, length]²` with `cells × cells` mesh cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectDomain {
    pub length: f64,
    pub cells: usize,
}

impl RectDomain {
    pub fn h(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn nodes_per_side(&self) -> usize {
        self.cells + 1
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [i as f64 * self.h(), j as f64 * self.h()]
    }
}

/// Smooth compactly supported bump `amplitude·exp(1 − 1/(1 − r²/radius²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSource {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
}

impl BumpSource {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r2 = ((x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2)) / self.radius.powi(2);
        if r2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectSolution {
    pub domain: RectDomain,
    pub eps: f64,
    pub a0: Mat2,
    /// Nodal values, `(cells+1)²`, row-major in `x₁`, boundary included.
    pub u_eps: Vec<f64>,
    pub u_hom: Vec<f64>,
    pub iterations: [usize; 2],
}

struct RectOperator<'a> {
    m: usize,
    /// Cell-center coefficients, `cells²` entries.
    a: &'a [Mat2],
    symmetric: bool,
    abar: [f64; 2],
    dst: Dst1,
}

impl<'a> RectOperator<'a> {
    fn new(m: usize, a: &'a [Mat2]) -> Self {
        let symmetric = a.iter().all(|c| c[0][1] == c[1][0]);
        let cnt = a.len() as f64;
        let abar = [
            a.iter().map(|c| c[0][0]).sum::<f64>() / cnt,
            a.iter().map(|c| c[1][1]).sum::<f64>() / cnt,
        ];
        RectOperator {
            m,
            a,
            symmetric,
            abar,
            dst: Dst1::new(m - 1),
        }
    }

    /// Interior unknown index for node `(i, j)`, `1 ≤ i, j ≤ m−1`.
    fn idx(&self, i: usize, j: usize) -> usize {
        (i - 1) * (self.m - 1) + (j - 1)
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let m = self.m;
        let val = |i: usize, j: usize| -> f64 {
            if i == 0 || j == 0 || i == m || j == m {
                0.0
            } else {
                u[self.idx(i, j)]
            }
        };
        out.iter_mut().for_each(|o| *o = 0.0);
        let w = 0.25;
        for ci in 0..m {
            for cj in 0..m {
                let a = &self.a[ci * m + cj];
                let corners = [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)];
                let v = corners.map(|(i, j)| val(i, j));
                // (x-edge endpoints, y-edge endpoints) per corner, as indices into `corners`
                const EDGES: [((usize, usize), (usize, usize)); 4] =
                    [((0, 1), (0, 2)), ((0, 1), (1, 3)), ((2, 3), (0, 2)), ((2, 3), (1, 3))];
                let mut acc = [0.0; 4];
                for &((xa, xb), (ya, yb)) in &EDGES {
                    // h·g; the h² of the cell area cancels
                    let gx = v[xb] - v[xa];
                    let gy = v[yb] - v[ya];
                    let qx = a[0][0] * gx + a[0][1] * gy;
                    let qy = a[1][0] * gx + a[1][1] * gy;
                    acc[xa] -= w * qx;
                    acc[xb] += w * qx;
                    acc[ya] -= w * qy;
                    acc[yb] += w * qy;
                }
                for (c, &(i, j)) in corners.iter().enumerate() {
                    if i > 0 && j > 0 && i < m && j < m {
                        out[self.idx(i, j)] += acc[c];
                    }
                }
            }
        }
    }

    /// Inverse of `Ā₁₁·(−δ²_x) + Ā₂₂·(−δ²_y)` by sine transforms.
    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        let n = self.m - 1;
        let mut tmp = vec![0.0; n * n];
        let mut row = vec![0.0; n];
        let mut col = vec![0.0; n];
        let mut out = vec![0.0; n];
        for i in 0..n {
            self.dst.transform(&r[i * n..(i + 1) * n], &mut out);
            tmp[i * n..(i + 1) * n].copy_from_slice(&out);
        }
        for j in 0..n {
            for i in 0..n {
                col[i] = tmp[i * n + j];
            }
            self.dst.transform(&col, &mut out);
            for i in 0..n {
                tmp[i * n + j] = out[i];
            }
        }
        let lam = |k: usize| 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / self.m as f64).cos();
        for i in 0..n {
            for j in 0..n {
                tmp[i * n + j] /= self.abar[0] * lam(i + 1) + self.abar[1] * lam(j + 1);
            }
        }
        let scale = (2.0 / self.m as f64).powi(2);
        for i in 0..n {
            row.copy_from_slice(&tmp[i * n..(i + 1) * n]);
            self.dst.transform(&row, &mut out);
            tmp[i * n..(i + 1) * n].copy_from_slice(&out);
        }
        for j in 0..n {
            for i in 0..n {
                col[i] = tmp[i * n + j];
            }
            self.dst.transform(&col, &mut out);
            for i in 0..n {
                z[i * n + j] = out[i] * scale;
            }
        }
    }

    fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, usize)> {
        let mut u = vec![0.0; rhs.len()];
        let opts = KrylovOptions {
            tol: RECT_TOL,
            abs_floor: 0.0,
            max_iter: 10_000,
        };
        let apply = |x: &[f64], y: &mut [f64]| self.apply(x, y);
        let prec = |r: &[f64], z: &mut [f64]| self.precondition(r, z);
        let st = if self.symmetric {
            pcg(apply, prec, rhs, &mut u, opts)?
        } else {
            bicgstab(apply, prec, rhs, &mut u, opts)?
        };
        Ok((u, st.iterations))
    }

    fn embed(&self, u: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut full = vec![0.0; (m + 1) * (m + 1)];
        for i in 1..m {
            for j in 1..m {
                full[i * (m + 1) + j] = u[self.idx(i, j)];
            }
        }
        full
    }
}

/// Homogenized tensor of a coefficient field, from the spectral cell solver.
pub fn homogenized_tensor_of(coeffs: &dyn CoefficientField) -> Result<Mat2> {
    let pc = PeriodicCoefficients::sample(coeffs, CELL_GRID)?;
    let chi = solve_corrector(&pc)?.chi;
    Ok(homogenized_tensor(&pc, &chi))
}

fn check_resolution(domain: &RectDomain, eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    if domain.cells < 4 || !(domain.length > 0.0) {
        return Err(Error::invalid("rectangle grid too small"));
    }
    let per_period = eps / domain.h();
    if per_period < MIN_CELLS_PER_PERIOD {
        return Err(Error::invalid(format!(
            "grid too coarse for eps = {eps}: {per_period:.2} cells per period, need at least {MIN_CELLS_PER_PERIOD}"
        )));
    }
    Ok(())
}

pub(crate) fn solve_rect_with(
    coeffs: &dyn CoefficientField,
    a0: Mat2,
    eps: f64,
    f: &(dyn Fn([f64; 2]) -> f64 + Sync),
    domain: RectDomain,
) -> Result<RectSolution> {
    check_resolution(&domain, eps)?;
    let m = domain.cells;
    let h = domain.h();
    let cells_eps: Vec<Mat2> = (0..m * m)
        .map(|c| {
            let x = [((c / m) as f64 + 0.5) * h, ((c % m) as f64 + 0.5) * h];
            coeffs.eval_at([x[0] / eps, x[1] / eps])
        })
        .collect();
    let cells_hom = vec![a0; m * m];
    let rhs: Vec<f64> = (1..m)
        .flat_map(|i| (1..m).map(move |j| (i, j)))
        .map(|(i, j)| h * h * f(domain.node(i, j)))
        .collect();
    let op_eps = RectOperator::new(m, &cells_eps);
    let op_hom = RectOperator::new(m, &cells_hom);
    let (ue, it_e) = op_eps.solve(&rhs)?;
    let (uh, it_h) = op_hom.solve(&rhs)?;
    Ok(RectSolution {
        domain,
        eps,
        a0,
        u_eps: op_eps.embed(&ue),
        u_hom: op_hom.embed(&uh),
        iterations: [it_e, it_h],
    })
}

/// Solves `−∇·A(x/ε)∇u^ε = f` and `−∇·A0∇u⁰ = f` with zero Dirichlet data.
pub fn dirichlet_rect_solver(
    coeffs: &dyn CoefficientField,
    eps: f64,
    f: &(dyn Fn([f64; 2]) -> f64 + Sync),
    domain: RectDomain,
) -> Result<RectSolution> {
    check_resolution(&domain, eps)?;
    let a0 = homogenized_tensor_of(coeffs)?;
    solve_rect_with(coeffs, a0, eps, f, domain)
}

impl RectSolution {
    /// `max |u^ε − u⁰|` over nodes at distance at least `collar` from the boundary.
    pub fn interior_error(&self, collar: f64) -> f64 {
        let n = self.domain.nodes_per_side();
        let len = self.domain.length;
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = self.domain.node(i, j);
                let dist = x[0].min(x[1]).min(len - x[0]).min(len - x[1]);
                if dist >= collar - 1e-12 {
                    let k = i * n + j;
                    err = err.max((self.u_eps[k] - self.u_hom[k]).abs());
                }
            }
        }
        err
    }

    /// `Σ h² u^ε f` over the nodes, the discrete `∫u^ε f`.
    pub fn load_pairing(&self, f: &dyn Fn([f64; 2]) -> f64) -> f64 {
        let n = self.domain.nodes_per_side();
        let h = self.domain.h();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += h * h * self.u_eps[i * n + j] * f(self.domain.node(i, j));
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub error: f64,
    pub collar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub a0: Mat2,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log error` against `log ε`.
    pub slope: Option<f64>,
    /// All errors at round-off level: there is nothing to fit.
    pub degenerate: bool,
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Interior max-norm homogenization error per ε (collar `2ε`) and its
/// log-log slope. All ε share the mesh of `domain`.
pub fn homogenization_error_sweep(
    coeffs: &dyn CoefficientField,
    f: &(dyn Fn([f64; 2]) -> f64 + Sync),
    eps_list: &[f64],
    domain: RectDomain,
) -> Result<SweepReport> {
    if eps_list.len() < 3 {
        return Err(Error::invalid("an error sweep needs at least three eps values"));
    }
    for &e in eps_list {
        check_resolution(&domain, e)?;
    }
    let a0 = homogenized_tensor_of(coeffs)?;
    let solutions: Vec<Result<RectSolution>> = std::thread::scope(|s| {
        let handles: Vec<_> = eps_list
            .iter()
            .map(|&eps| s.spawn(move || solve_rect_with(coeffs, a0, eps, f, domain)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut scale: f64 = 0.0;
    for (sol, &eps) in solutions.into_iter().zip(eps_list) {
        let sol = sol?;
        scale = scale.max(sol.u_hom.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        rows.push(SweepRow {
            eps,
            error: sol.interior_error(2.0 * eps),
            collar: 2.0 * eps,
        });
    }
    let degenerate = rows.iter().all(|r| r.error <= 1e-9 * scale.max(f64::MIN_POSITIVE));
    let slope = if degenerate {
        None
    } else {
        let x: Vec<f64> = rows.iter().map(|r| r.eps.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.error.max(f64::MIN_POSITIVE).ln()).collect();
        Some(linear_fit(&x, &y).0)
    };
    Ok(SweepReport {
        a0,
        rows,
        slope,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::CoefficientModel;

    fn bump() -> BumpSource {
        BumpSource {
            center: [0.5, 0.5],
            radius: 0.3,
            amplitude: 10.0,
        }
    }

    #[test]
    fn identity_has_no_homogenization_error() {
        let b = bump();
        let f = move |x: [f64; 2]| b.eval(x);
        let sol = dirichlet_rect_solver(&CoefficientModel::Identity, 0.25, &f, RectDomain { length: 1.0, cells: 64 })
            .unwrap();
        let diff = sol.u_eps.iter().zip(&sol.u_hom).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
        assert!(sol.u_hom.iter().cloned().fold(0.0, f64::max) > 0.01);
    }

    #[test]
    fn five_point_limit_matches_poisson_solution() {
        // −Δu = 2π²sin(πx)sin(πy) on the unit square
        let f = |x: [f64; 2]| {
            2.0 * std::f64::consts::PI.powi(2)
                * (std::f64::consts::PI * x[0]).sin()
                * (std::f64::consts::PI * x[1]).sin()
        };
        let d = RectDomain { length: 1.0, cells: 64 };
        let sol = dirichlet_rect_solver(&CoefficientModel::Identity, 1.0 / 8.0, &f, d).unwrap();
        let n = d.nodes_per_side();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = d.node(i, j);
                let exact = (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin();
                err = err.max((sol.u_hom[i * n + j] - exact).abs());
            }
        }
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn refuses_under_resolved_eps() {
        let f = |_: [f64; 2]| 1.0;
        let r = dirichlet_rect_solver(&CoefficientModel::standard_layered(), 1.0 / 32.0, &f, RectDomain {
            length: 1.0,
            cells: 128,
        });
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pairing_is_invariant_under_transposition() {
        let b = bump();
        let f = move |x: [f64; 2]| b.eval(x);
        let d = RectDomain { length: 1.0, cells: 64 };
        let model = CoefficientModel::Anisotropic { skew: 0.2 };
        let a = dirichlet_rect_solver(&model, 0.25, &f, d).unwrap();
        let at = dirichlet_rect_solver(&Transposed(&model), 0.25, &f, d).unwrap();
        let (pa, pb) = (a.load_pairing(&f), at.load_pairing(&f));
        assert!((pa - pb).abs() < 1e-8 * pa.abs(), "{pa} {pb}");
        assert!(a.u_eps != at.u_eps);
    }

    #[test]
    fn sweep_needs_three_values() {
        let f = |_: [f64; 2]| 1.0;
        let r = homogenization_error_sweep(&CoefficientModel::Identity, &f, &[0.5, 0.25], RectDomain {
            length: 1.0,
            cells: 32,
        });
        assert!(r.is_err());
    }

    #[test]
    fn identity_sweep_is_degenerate() {
        let b = bump();
        let f = move |x: [f64; 2]| b.eval(x);
        let r = homogenization_error_sweep(&CoefficientModel::Identity, &f, &[0.5, 0.25, 0.125], RectDomain {
            length: 1.0,
            cells: 64,
        })
        .unwrap();
        assert!(r.degenerate && r.slope.is_none());
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (s, c) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-14 && (c - 1.0).abs() < 1e-14);
    }
}
