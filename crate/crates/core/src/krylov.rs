//! Matrix-free Krylov solvers.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Stop when the residual norm drops below `tol · max(‖b‖, abs_floor)`.
    pub tol: f64,
    pub abs_floor: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tol: 1e-10,
            abs_floor: 0.0,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    /// Final residual in the norm used for stopping.
    pub residual: f64,
    /// Same, relative to the right-hand side.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradient for a symmetric positive (semi)definite
/// operator. The stopping norm is the preconditioned one, `√(rᵀP⁻¹r)`.
pub fn pcg<A, P>(mut apply: A, mut precond: P, b: &[f64], x: &mut [f64], opts: KrylovOptions) -> Result<KrylovStats>
where
    A: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut ap = vec![0.0; n];

    precond(b, &mut z);
    let b_norm = dot(b, &z).max(0.0).sqrt();
    let target = opts.tol * b_norm.max(opts.abs_floor);

    apply(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    precond(&r, &mut z);
    let mut rz = dot(&r, &z);
    let mut p = z.clone();
    let stats = |it: usize, rz: f64| {
        let res = rz.max(0.0).sqrt();
        KrylovStats {
            iterations: it,
            residual: res,
            relative_residual: if b_norm > 0.0 { res / b_norm } else { res },
        }
    };
    if rz.max(0.0).sqrt() <= target {
        return Ok(stats(0, rz));
    }
    for it in 1..=opts.max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: rz.max(0.0).sqrt(),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        if rz_new.max(0.0).sqrt() <= target {
            return Ok(stats(it, rz_new));
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: rz.max(0.0).sqrt(),
    })
}

/// Right-preconditioned BiCGSTAB for nonsymmetric operators; stops on the
/// Euclidean residual norm.
pub fn bicgstab<A, P>(mut apply: A, mut precond: P, b: &[f64], x: &mut [f64], opts: KrylovOptions) -> Result<KrylovStats>
where
    A: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    let target = opts.tol * b_norm.max(opts.abs_floor);
    let mut r = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    apply(x, &mut tmp);
    for i in 0..n {
        r[i] = b[i] - tmp[i];
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let stats = |it: usize, res: f64| KrylovStats {
        iterations: it,
        residual: res,
        relative_residual: if b_norm > 0.0 { res / b_norm } else { res },
    };
    let mut res = dot(&r, &r).sqrt();
    if res <= target {
        return Ok(stats(0, res));
    }
    for it in 1..=opts.max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut phat);
        apply(&phat, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let s_norm = dot(&s, &s).sqrt();
        if s_norm <= target {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok(stats(it, s_norm));
        }
        precond(&s, &mut shat);
        apply(&shat, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        res = dot(&r, &r).sqrt();
        if res <= target {
            return Ok(stats(it, res));
        }
        if omega == 0.0 {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: res,
    })
}

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[i]` couples
/// row `i` to `i-1`, `upper[i]` couples row `i` to `i+1`.
pub fn solve_tridiagonal<T>(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [T])
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    rhs[0] = rhs[0] * (1.0 / denom);
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        rhs[i] = (rhs[i] - rhs[i - 1] * lower[i]) * (1.0 / denom);
    }
    for i in (0..n - 1).rev() {
        rhs[i] = rhs[i] - rhs[i + 1] * c[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(x: &[f64], y: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] } else { 0.0 };
            y[i] = 2.0 * x[i] - l - r;
        }
    }

    #[test]
    fn cg_solves_dirichlet_laplacian() {
        let n = 50;
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let st = pcg(laplacian_1d, |r, z| z.copy_from_slice(r), &b, &mut x, KrylovOptions::default()).unwrap();
        assert!(st.iterations <= n);
        let mut ax = vec![0.0; n];
        laplacian_1d(&x, &mut ax);
        assert!(ax.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn bicgstab_nonsymmetric() {
        let n = 40;
        let apply = |x: &[f64], y: &mut [f64]| {
            laplacian_1d(x, y);
            for i in 1..x.len() {
                y[i] += 0.3 * (x[i] - x[i - 1]);
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut x = vec![0.0; n];
        bicgstab(apply, |r, z| z.copy_from_slice(r), &b, &mut x, KrylovOptions::default()).unwrap();
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax);
        assert!(ax.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn thomas_matches_cg() {
        let n = 20;
        let mut rhs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let b = rhs.clone();
        solve_tridiagonal(&vec![-1.0; n], &vec![2.0; n], &vec![-1.0; n], &mut rhs);
        let mut ax = vec![0.0; n];
        laplacian_1d(&rhs, &mut ax);
        assert!(ax.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let n = 100;
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let opts = KrylovOptions { max_iter: 3, ..Default::default() };
        match pcg(laplacian_1d, |r, z| z.copy_from_slice(r), &b, &mut x, opts) {
            Err(Error::NonConvergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
