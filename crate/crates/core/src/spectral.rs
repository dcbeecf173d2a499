//! Fourier collocation on periodic grids.
//!
//! Grids are row-major with the first index along the first coordinate:
//! node `(i, j)` of an `n1 × n2` grid sits at `(i/n1·L1, j/n2·L2)` and is stored
//! at `i * n2 + j`. Odd derivatives drop the Nyquist mode of even grids.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Signed wavenumber of FFT bin `k` on an `n`-point grid.
pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

pub fn is_nyquist(k: usize, n: usize) -> bool {
    n.is_multiple_of(2) && k == n / 2
}

/// First-derivative symbol `2πi k / L` (zero at Nyquist).
pub fn derivative_symbol(k: usize, n: usize, period: f64) -> f64 {
    if is_nyquist(k, n) {
        0.0
    } else {
        2.0 * PI * wavenumber(k, n) as f64 / period
    }
}

/// One-dimensional periodic transforms of length `n`.
#[derive(Clone)]
pub struct Spectral1 {
    pub n: usize,
    pub period: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Real derivative multipliers `2π k / L` per bin.
    pub ik: Vec<f64>,
}

impl Spectral1 {
    pub fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        Spectral1 {
            n,
            period,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            ik: (0..n).map(|k| derivative_symbol(k, n, period)).collect(),
        }
    }

    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse transform, normalized, returning the real part.
    pub fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let mut h = self.forward(f);
        for (c, &k) in h.iter_mut().zip(&self.ik) {
            *c *= Complex64::new(0.0, k);
        }
        self.inverse_real(h)
    }
}

/// Two-dimensional periodic transforms on an `n1 × n2` grid over `[0,L1)×[0,L2)`.
#[derive(Clone)]
pub struct Spectral2 {
    pub n1: usize,
    pub n2: usize,
    pub periods: [f64; 2],
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

impl Spectral2 {
    pub fn new(n1: usize, n2: usize, periods: [f64; 2]) -> Self {
        let mut planner = FftPlanner::new();
        Spectral2 {
            n1,
            n2,
            periods,
            fwd1: planner.plan_fft_forward(n1),
            inv1: planner.plan_fft_inverse(n1),
            fwd2: planner.plan_fft_forward(n2),
            inv2: planner.plan_fft_inverse(n2),
            k1: (0..n1).map(|k| derivative_symbol(k, n1, periods[0])).collect(),
            k2: (0..n2).map(|k| derivative_symbol(k, n2, periods[1])).collect(),
        }
    }

    pub fn unit(n: usize) -> Self {
        Self::new(n, n, [1.0, 1.0])
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let (f1, f2) = if inverse {
            (&self.inv1, &self.inv2)
        } else {
            (&self.fwd1, &self.fwd2)
        };
        for row in buf.chunks_mut(self.n2) {
            f2.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); self.n1];
        for j in 0..self.n2 {
            for i in 0..self.n1 {
                col[i] = buf[i * self.n2 + j];
            }
            f1.process(&mut col);
            for i in 0..self.n1 {
                buf[i * self.n2 + j] = col[i];
            }
        }
    }

    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, false);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
        let s = 1.0 / self.len() as f64;
        for c in buf.iter_mut() {
            *c *= s;
        }
    }

    pub fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inverse_in_place(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Spectral gradient `(∂₁f, ∂₂f)`.
    pub fn gradient(&self, f: &[f64]) -> [Vec<f64>; 2] {
        let h = self.forward(f);
        [self.apply_symbol(&h, 0), self.apply_symbol(&h, 1)]
    }

    /// Derivative along `axis` of a field given by its transform.
    pub fn apply_symbol(&self, h: &[Complex64], axis: usize) -> Vec<f64> {
        let mut out = h.to_vec();
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                let k = if axis == 0 { self.k1[i] } else { self.k2[j] };
                out[i * self.n2 + j] *= Complex64::new(0.0, k);
            }
        }
        self.inverse_real(out)
    }

    /// Directional derivative `c₁∂₁f + c₂∂₂f`.
    pub fn directional(&self, f: &[f64], c: [f64; 2]) -> Vec<f64> {
        let mut h = self.forward(f);
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                let k = c[0] * self.k1[i] + c[1] * self.k2[j];
                h[i * self.n2 + j] *= Complex64::new(0.0, k);
            }
        }
        self.inverse_real(h)
    }

    /// Spectral divergence `∂₁g₁ + ∂₂g₂`.
    pub fn divergence(&self, g1: &[f64], g2: &[f64]) -> Vec<f64> {
        let h1 = self.forward(g1);
        let h2 = self.forward(g2);
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                let idx = i * self.n2 + j;
                out[idx] = Complex64::new(0.0, self.k1[i]) * h1[idx]
                    + Complex64::new(0.0, self.k2[j]) * h2[idx];
            }
        }
        self.inverse_real(out)
    }

    /// Node coordinates of grid point `idx`.
    pub fn node(&self, idx: usize) -> [f64; 2] {
        let (i, j) = (idx / self.n2, idx % self.n2);
        [
            i as f64 * self.periods[0] / self.n1 as f64,
            j as f64 * self.periods[1] / self.n2 as f64,
        ]
    }
}

/// Type-I discrete sine transform `X_k = Σ_{j=1}^{N} x_j sin(πjk/(N+1))`,
/// `k = 1..=N`, through a length-`2(N+1)` FFT. Applying it twice multiplies
/// by `(N+1)/2`.
pub struct Dst1 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Dst1 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Dst1 {
            n,
            fft: planner.plan_fft_forward(2 * (n + 1)),
        }
    }

    pub fn transform(&self, x: &[f64], out: &mut [f64]) {
        let m = self.n + 1;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * m];
        for j in 0..self.n {
            buf[j + 1] = Complex64::new(x[j], 0.0);
            buf[2 * m - 1 - j] = Complex64::new(-x[j], 0.0);
        }
        self.fft.process(&mut buf);
        for k in 0..self.n {
            out[k] = -0.5 * buf[k + 1].im;
        }
    }
}

pub fn mean(f: &[f64]) -> f64 {
    f.iter().sum::<f64>() / f.len() as f64
}

pub fn rms(f: &[f64]) -> f64 {
    (f.iter().map(|x| x * x).sum::<f64>() / f.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_trig_polynomial() {
        let s = Spectral2::unit(16);
        let f: Vec<f64> = (0..s.len())
            .map(|i| {
                let [x, y] = s.node(i);
                (2.0 * PI * x).sin() * (4.0 * PI * y).cos()
            })
            .collect();
        let [gx, gy] = s.gradient(&f);
        for i in 0..s.len() {
            let [x, y] = s.node(i);
            let ex = 2.0 * PI * (2.0 * PI * x).cos() * (4.0 * PI * y).cos();
            let ey = -4.0 * PI * (2.0 * PI * x).sin() * (4.0 * PI * y).sin();
            assert!((gx[i] - ex).abs() < 1e-11);
            assert!((gy[i] - ey).abs() < 1e-11);
        }
    }

    #[test]
    fn one_dimensional_period() {
        let s = Spectral1::new(32, 5.0);
        let f: Vec<f64> = (0..32)
            .map(|i| (2.0 * PI * i as f64 * 5.0 / 32.0 / 5.0).cos())
            .collect();
        let d = s.derivative(&f);
        for (i, v) in d.iter().enumerate() {
            let x = i as f64 * 5.0 / 32.0;
            assert!((v + 2.0 * PI / 5.0 * (2.0 * PI * x / 5.0).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn dst_matches_direct_sum() {
        let n = 7;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos() + 0.1 * i as f64).collect();
        let d = Dst1::new(n);
        let mut out = vec![0.0; n];
        d.transform(&x, &mut out);
        for k in 1..=n {
            let direct: f64 = (1..=n)
                .map(|j| x[j - 1] * (PI * (j * k) as f64 / (n + 1) as f64).sin())
                .sum();
            assert!((out[k - 1] - direct).abs() < 1e-12);
        }
        let mut back = vec![0.0; n];
        d.transform(&out, &mut back);
        for j in 0..n {
            assert!((back[j] * 2.0 / (n + 1) as f64 - x[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn wavenumbers() {
        assert_eq!(wavenumber(0, 8), 0);
        assert_eq!(wavenumber(3, 8), 3);
        assert_eq!(wavenumber(4, 8), 4);
        assert_eq!(wavenumber(5, 8), -3);
        assert!(is_nyquist(4, 8));
        assert_eq!(derivative_symbol(4, 8, 1.0), 0.0);
    }
}
