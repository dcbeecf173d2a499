use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coefficients::{Mat2, PeriodicCoefficients};
use crate::error::{Error, Result};
use crate::krylov::{bicgstab, pcg, KrylovOptions};
use crate::spectral::{mean, Spectral2};

/// Required residual, relative to `sup |A|`, in the discrete `H⁻¹` norm.
pub const CELL_RESIDUAL_TOL: f64 = 1e-8;
pub const CELL_MAX_ITER: usize = 10_000;
/// Divergence of `Φ` above this (relative to `sup |A|`) means χ was not solved.
const FLUX_DIVERGENCE_TOL: f64 = 1e-6;

pub type Field = Vec<f64>;

/// `u ↦ −∇·(A∇u)` by Fourier collocation, with a constant-coefficient
/// preconditioner built from the mean of `A`.
pub(crate) struct CellOperator<'a> {
    pub spec: Spectral2,
    coeffs: &'a PeriodicCoefficients,
    symbol: Vec<f64>,
}

impl<'a> CellOperator<'a> {
    pub fn new(coeffs: &'a PeriodicCoefficients) -> Self {
        let spec = Spectral2::unit(coeffs.grid);
        let am = coeffs.mean();
        let n = coeffs.grid;
        let mut symbol = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let (k1, k2) = (spec.k1[i], spec.k2[j]);
                symbol[i * n + j] = am[0][0] * k1 * k1 + (am[0][1] + am[1][0]) * k1 * k2 + am[1][1] * k2 * k2;
            }
        }
        CellOperator { spec, coeffs, symbol }
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let [g1, g2] = self.spec.gradient(u);
        let e = &self.coeffs.entries;
        let q1: Vec<f64> = (0..u.len()).map(|i| e[0][0][i] * g1[i] + e[0][1][i] * g2[i]).collect();
        let q2: Vec<f64> = (0..u.len()).map(|i| e[1][0][i] * g1[i] + e[1][1][i] * g2[i]).collect();
        let d = self.spec.divergence(&q1, &q2);
        for (o, v) in out.iter_mut().zip(d) {
            *o = -v;
        }
    }

    pub fn precondition(&self, r: &[f64], z: &mut [f64]) {
        let mut h = self.spec.forward(r);
        for (c, &s) in h.iter_mut().zip(&self.symbol) {
            *c = if s > 0.0 { *c / s } else { Complex64::new(0.0, 0.0) };
        }
        z.copy_from_slice(&self.spec.inverse_real(h));
    }

    /// Removes the Fourier modes on which every derivative symbol vanishes
    /// (the mean and the pure-Nyquist modes), i.e. projects onto the range.
    pub fn project_range(&self, f: &[f64]) -> Field {
        let n = self.coeffs.grid;
        let mut h = self.spec.forward(f);
        for i in 0..n {
            for j in 0..n {
                if self.spec.k1[i] == 0.0 && self.spec.k2[j] == 0.0 {
                    h[i * n + j] = Complex64::new(0.0, 0.0);
                }
            }
        }
        self.spec.inverse_real(h)
    }

    /// Discrete `H⁻¹` norm of a grid function: `(Σ_k |f̂_k|² / |2πk|²)^{1/2}`
    /// over modes with a nonzero symbol.
    pub fn h_minus_one_norm(&self, f: &[f64]) -> f64 {
        let n = self.coeffs.grid;
        let h = self.spec.forward(f);
        let scale = 1.0 / (n * n) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let k2 = self.spec.k1[i].powi(2) + self.spec.k2[j].powi(2);
                if k2 > 0.0 {
                    acc += (h[i * n + j] * scale).norm_sqr() / k2;
                }
            }
        }
        acc.sqrt()
    }

    /// Solves `L u = rhs` (after projecting `rhs` onto the range) for the
    /// zero-mean `u`. Returns the solution, its `H⁻¹` residual and iterations.
    pub fn solve(&self, rhs: &[f64]) -> Result<(Field, f64, usize)> {
        let b = self.project_range(rhs);
        let scale = self.coeffs.sup_norm();
        let mut x = vec![0.0; b.len()];
        let opts = KrylovOptions {
            tol: 1e-12,
            abs_floor: scale * (b.len() as f64).sqrt() * 1e-3,
            max_iter: CELL_MAX_ITER,
        };
        let apply = |u: &[f64], out: &mut [f64]| self.apply(u, out);
        let prec = |r: &[f64], z: &mut [f64]| self.precondition(r, z);
        let stats = if self.coeffs.is_symmetric() {
            pcg(apply, prec, &b, &mut x, opts)?
        } else {
            bicgstab(apply, prec, &b, &mut x, opts)?
        };
        let m = mean(&x);
        x.iter_mut().for_each(|v| *v -= m);
        let mut lx = vec![0.0; x.len()];
        self.apply(&x, &mut lx);
        let r: Vec<f64> = b.iter().zip(&lx).map(|(b, l)| b - l).collect();
        let res = self.h_minus_one_norm(&r);
        if res > CELL_RESIDUAL_TOL * scale {
            return Err(Error::NonConvergence {
                iterations: stats.iterations,
                residual: res,
            });
        }
        Ok((x, res, stats.iterations))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorSolution {
    /// `chi[β]`, zero-mean.
    pub chi: [Field; 2],
    /// `H⁻¹` residual per β.
    pub residuals: [f64; 2],
    pub iterations: [usize; 2],
}

/// Cell problems `−∇·A∇χ^β = ∂_α A^{αβ}` on the unit torus.
pub fn solve_corrector(coeffs: &PeriodicCoefficients) -> Result<CorrectorSolution> {
    if coeffs.grid < 16 {
        return Err(Error::invalid(format!("cell grid {} is below 16", coeffs.grid)));
    }
    let op = CellOperator::new(coeffs);
    let e = &coeffs.entries;
    let mut out = CorrectorSolution {
        chi: Default::default(),
        residuals: [0.0; 2],
        iterations: [0; 2],
    };
    for beta in 0..2 {
        let rhs = op.spec.divergence(&e[0][beta], &e[1][beta]);
        let (x, res, it) = op.solve(&rhs)?;
        out.chi[beta] = x;
        out.residuals[beta] = res;
        out.iterations[beta] = it;
    }
    Ok(out)
}

/// `A0^{αβ} = ∫A^{αβ} + ∫A^{αγ}∂_γχ^β`.
pub fn homogenized_tensor(coeffs: &PeriodicCoefficients, chi: &[Field; 2]) -> Mat2 {
    let spec = Spectral2::unit(coeffs.grid);
    let grads = [spec.gradient(&chi[0]), spec.gradient(&chi[1])];
    let e = &coeffs.entries;
    let mut a0 = [[0.0; 2]; 2];
    for (al, row) in a0.iter_mut().enumerate() {
        for (be, v) in row.iter_mut().enumerate() {
            let flux: Vec<f64> = (0..e[0][0].len())
                .map(|i| e[al][be][i] + e[al][0][i] * grads[be][0][i] + e[al][1][i] * grads[be][1][i])
                .collect();
            *v = mean(&flux);
        }
    }
    a0
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaSolution {
    /// `gamma[α][β]`, zero-mean.
    pub gamma: [[Field; 2]; 2],
    pub b: [[Field; 2]; 2],
    pub residuals: [[f64; 2]; 2],
}

/// Builds `B^{αβ} = A^{αβ} + A^{αγ}∂_γχ^β + ∂_γ(A^{γα}χ^β)` and solves
/// `−∇·A∇Γ^{αβ} = B^{αβ} − ∫B^{αβ}`.
pub fn solve_gamma(coeffs: &PeriodicCoefficients, chi: &[Field; 2], a0: &Mat2) -> Result<GammaSolution> {
    let op = CellOperator::new(coeffs);
    let spec = &op.spec;
    let e = &coeffs.entries;
    let len = e[0][0].len();
    let grads = [spec.gradient(&chi[0]), spec.gradient(&chi[1])];
    let mut out = GammaSolution {
        gamma: Default::default(),
        b: Default::default(),
        residuals: [[0.0; 2]; 2],
    };
    for al in 0..2 {
        for be in 0..2 {
            let w1: Vec<f64> = (0..len).map(|i| e[0][al][i] * chi[be][i]).collect();
            let w2: Vec<f64> = (0..len).map(|i| e[1][al][i] * chi[be][i]).collect();
            let dw = spec.divergence(&w1, &w2);
            let b: Field = (0..len)
                .map(|i| e[al][be][i] + e[al][0][i] * grads[be][0][i] + e[al][1][i] * grads[be][1][i] + dw[i])
                .collect();
            // the mean of B is A0 up to the divergence term, which is mean-free
            debug_assert!((mean(&b) - a0[al][be]).abs() < 1e-6 * coeffs.sup_norm().max(1.0));
            let mb = mean(&b);
            let src: Vec<f64> = b.iter().map(|v| v - mb).collect();
            let (g, res, _) = op.solve(&src)?;
            out.gamma[al][be] = g;
            out.b[al][be] = b;
            out.residuals[al][be] = res;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxPotential {
    /// `phi[α][β]`.
    pub phi: [[Field; 2]; 2],
    /// `psi[γ][α][β]`, antisymmetric in `(γ, α)`.
    pub psi: [[[Field; 2]; 2]; 2],
    /// `‖∇·Ψ − Φ‖₂ / ‖Φ‖₂` (absolute when `Φ ≡ 0`).
    pub residual: f64,
}

/// `Φ = A(Id+∇χ) − A0` and a skew potential with `∂_γΨ^{γαβ} = Φ^{αβ}`,
/// `Ψ^{γαβ} = ∂_γ f^{αβ} − ∂_α f^{γβ}` where `Δf = Φ`.
pub fn flux_potential(coeffs: &PeriodicCoefficients, chi: &[Field; 2], a0: &Mat2) -> Result<FluxPotential> {
    let op = CellOperator::new(coeffs);
    let spec = &op.spec;
    let n = coeffs.grid;
    let len = n * n;
    let e = &coeffs.entries;
    let grads = [spec.gradient(&chi[0]), spec.gradient(&chi[1])];
    let mut phi: [[Field; 2]; 2] = Default::default();
    for al in 0..2 {
        for be in 0..2 {
            phi[al][be] = (0..len)
                .map(|i| e[al][be][i] + e[al][0][i] * grads[be][0][i] + e[al][1][i] * grads[be][1][i] - a0[al][be])
                .collect();
        }
    }
    let scale = coeffs.sup_norm();
    for be in 0..2 {
        let div = spec.divergence(&phi[0][be], &phi[1][be]);
        let dn = op.h_minus_one_norm(&div);
        if dn > FLUX_DIVERGENCE_TOL * scale {
            return Err(Error::invalid(format!(
                "flux has divergence {dn:.3e}; correctors are not converged"
            )));
        }
    }

    // f^{αβ} = Δ⁻¹Φ^{αβ}, then its gradient
    let mut grad_f: [[[Field; 2]; 2]; 2] = Default::default(); // [α][β][γ] = ∂_γ f^{αβ}
    for al in 0..2 {
        for be in 0..2 {
            let mut h = spec.forward(&phi[al][be]);
            for i in 0..n {
                for j in 0..n {
                    let s = spec.k1[i].powi(2) + spec.k2[j].powi(2);
                    h[i * n + j] = if s > 0.0 { -h[i * n + j] / s } else { Complex64::new(0.0, 0.0) };
                }
            }
            grad_f[al][be] = [spec.apply_symbol(&h, 0), spec.apply_symbol(&h, 1)];
        }
    }
    let mut psi: [[[Field; 2]; 2]; 2] = Default::default();
    for ga in 0..2 {
        for al in 0..2 {
            for be in 0..2 {
                psi[ga][al][be] = (0..len).map(|i| grad_f[al][be][ga][i] - grad_f[ga][be][al][i]).collect();
            }
        }
    }

    let (mut num, mut den) = (0.0, 0.0);
    for al in 0..2 {
        for be in 0..2 {
            let d = spec.divergence(&psi[0][al][be], &psi[1][al][be]);
            for i in 0..len {
                num += (d[i] - phi[al][be][i]).powi(2);
                den += phi[al][be][i].powi(2);
            }
        }
    }
    let residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok(FluxPotential { phi, psi, residual })
}

/// Everything the cell module produces for one coefficient field.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorSet {
    pub grid: usize,
    pub chi: [Field; 2],
    pub a0: Mat2,
    pub gamma: [[Field; 2]; 2],
    pub b: [[Field; 2]; 2],
    pub phi: [[Field; 2]; 2],
    pub psi: [[[Field; 2]; 2]; 2],
    pub residuals: CellResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResiduals {
    pub chi: [f64; 2],
    pub gamma: [[f64; 2]; 2],
    pub psi: f64,
}

pub fn compute_corrector_set(coeffs: &PeriodicCoefficients) -> Result<CorrectorSet> {
    let sol = solve_corrector(coeffs)?;
    let a0 = homogenized_tensor(coeffs, &sol.chi);
    let gam = solve_gamma(coeffs, &sol.chi, &a0)?;
    let flux = flux_potential(coeffs, &sol.chi, &a0)?;
    Ok(CorrectorSet {
        grid: coeffs.grid,
        a0,
        residuals: CellResiduals {
            chi: sol.residuals,
            gamma: gam.residuals,
            psi: flux.residual,
        },
        chi: sol.chi,
        gamma: gam.gamma,
        b: gam.b,
        phi: flux.phi,
        psi: flux.psi,
    })
}

/// Eigenvalues of the symmetric part of a 2×2 matrix, ascending.
pub fn symmetric_eigenvalues(a: &Mat2) -> [f64; 2] {
    let s12 = 0.5 * (a[0][1] + a[1][0]);
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - s12 * s12;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    [0.5 * tr - disc, 0.5 * tr + disc]
}
