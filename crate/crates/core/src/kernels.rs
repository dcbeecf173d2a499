//! Green and Poisson kernels of the Laplacian in a half-plane `{y·n > a}`,
//! the Poisson representation of boundary-layer solutions, and sampled
//! checks of the kernel bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::NormalFrame;
use crate::quadrature::{gauss_legendre, CompositeRule};

/// Points farther than this from the boundary line are not "on" it.
const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Green,
    Poisson,
}

/// Kernel of `−Δ` (identity coefficients) on the half-plane of `frame`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneKernel {
    pub frame: NormalFrame,
    pub kind: KernelKind,
    pub coefficient: [[f64; 2]; 2],
}

impl HalfPlaneKernel {
    pub fn laplacian(frame: &NormalFrame, kind: KernelKind) -> Result<Self> {
        if frame.dim() != 2 {
            return Err(Error::invalid("half-plane kernels are two-dimensional"));
        }
        Ok(HalfPlaneKernel {
            frame: frame.clone(),
            kind,
            coefficient: [[1.0, 0.0], [0.0, 1.0]],
        })
    }

    /// `y·n − a`.
    pub fn height(&self, y: [f64; 2]) -> f64 {
        y[0] * self.frame.n[0] + y[1] * self.frame.n[1] - self.frame.a
    }

    /// Mirror image of `y` across the boundary line.
    pub fn reflect(&self, y: [f64; 2]) -> [f64; 2] {
        let h = self.height(y);
        [y[0] - 2.0 * h * self.frame.n[0], y[1] - 2.0 * h * self.frame.n[1]]
    }

    pub fn eval(&self, y: [f64; 2], yt: [f64; 2]) -> Result<f64> {
        match self.kind {
            KernelKind::Poisson => poisson_kernel(self, y, yt),
            KernelKind::Green => green_kernel(self, y, yt),
        }
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// `P(y, ỹ) = (1/π)(y·n − a)/|y − ỹ|²` for interior `y` and boundary `ỹ`.
pub fn poisson_kernel(k: &HalfPlaneKernel, y: [f64; 2], yt: [f64; 2]) -> Result<f64> {
    let h = k.height(y);
    if !(h > 0.0) {
        return Err(Error::invalid(format!("point {y:?} is not inside the half-plane")));
    }
    if k.height(yt).abs() > BOUNDARY_TOL {
        return Err(Error::invalid(format!("point {yt:?} is not on the boundary")));
    }
    Ok(h / (PI * dist2(y, yt)))
}

/// `∇_y P(y, ỹ)`.
pub fn poisson_kernel_gradient(k: &HalfPlaneKernel, y: [f64; 2], yt: [f64; 2]) -> Result<[f64; 2]> {
    let h = k.height(y);
    poisson_kernel(k, y, yt)?;
    let r2 = dist2(y, yt);
    let n = &k.frame.n;
    Ok([
        (n[0] / r2 - 2.0 * h * (y[0] - yt[0]) / (r2 * r2)) / PI,
        (n[1] / r2 - 2.0 * h * (y[1] - yt[1]) / (r2 * r2)) / PI,
    ])
}

/// Image-method Green function `(1/4π) ln(|y − ỹ*|²/|y − ỹ|²)`, `ỹ*` the
/// reflection of `ỹ`; equivalently `(1/4π) ln(1 + 4hh̃/|y − ỹ|²)`.
pub fn green_kernel(k: &HalfPlaneKernel, y: [f64; 2], yt: [f64; 2]) -> Result<f64> {
    let (h, ht) = (k.height(y), k.height(yt));
    if h < -BOUNDARY_TOL || ht < -BOUNDARY_TOL {
        return Err(Error::invalid("Green kernel arguments must lie in the closed half-plane"));
    }
    let r2 = dist2(y, yt);
    if r2 == 0.0 {
        return Err(Error::invalid("Green kernel is singular on the diagonal"));
    }
    Ok((4.0 * h.max(0.0) * ht.max(0.0) / r2).ln_1p() / (4.0 * PI))
}

/// `P^ε(x, x̃) = ε⁻¹P(x/ε, x̃/ε)`, the Poisson kernel of `{x·n > εa}`.
pub fn poisson_kernel_scaled(k: &HalfPlaneKernel, eps: f64, x: [f64; 2], xt: [f64; 2]) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    Ok(poisson_kernel(k, [x[0] / eps, x[1] / eps], [xt[0] / eps, xt[1] / eps])? / eps)
}

/// Window `[s₀ − W, s₀ + W]` around the foot of each point, and the number
/// of nodes to spread over it (rounded up to whole panels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryQuadrature {
    pub half_width: f64,
    pub nodes: usize,
    #[serde(default)]
    pub far_field: FarField,
}

/// Value assigned to `v₀` outside the window, weighted by the omitted mass.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FarField {
    /// Plain truncation.
    #[default]
    None,
    /// The average of `v₀` over the window.
    WindowMean,
    /// A known mean of `v₀`.
    Mean { value: f64 },
}

const PANEL_ORDER: usize = 16;
/// Minimum `W / (y·n − a)` for the window to be called wide enough.
pub const MIN_WIDTH_RATIO: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonSolveReport {
    pub values: Vec<f64>,
    /// Per point, the kernel mass outside the window, `1 − (2/π)atan(W/h)`.
    pub omitted_mass: Vec<f64>,
    /// `max omitted mass × sup|v₀|` (sup sampled on the nodes).
    pub truncated_mass_bound: f64,
    /// `W ≥ 50·max(y·n − a)`.
    pub width_ok: bool,
}

/// `w(y) = ∫_{∂Ω} P(y, ỹ) v₀(ỹ) dỹ` by composite Gauss–Legendre on the
/// boundary window centred at the foot of `y`, panels at most `min(1,h)/4`.
pub fn poisson_solve(
    v0: &(dyn Fn([f64; 2]) -> f64 + Sync),
    frame: &NormalFrame,
    points: &[[f64; 2]],
    quad: BoundaryQuadrature,
) -> Result<PoissonSolveReport> {
    let k = HalfPlaneKernel::laplacian(frame, KernelKind::Poisson)?;
    if !(quad.half_width > 0.0) {
        return Err(Error::invalid("quadrature half-width must be positive"));
    }
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let mut values = Vec::with_capacity(points.len());
    let mut omitted = Vec::with_capacity(points.len());
    let mut vmax: f64 = 0.0;
    let mut hmax: f64 = 0.0;
    for &y in points {
        let h = k.height(y);
        if !(h > 0.0) {
            return Err(Error::invalid(format!("point {y:?} is not inside the half-plane")));
        }
        hmax = hmax.max(h);
        let s0 = frame.tangential_coords(&y)[0];
        let max_panel = h.min(1.0) / 4.0;
        let panels = ((2.0 * quad.half_width / max_panel).ceil() as usize).max(quad.nodes.div_ceil(PANEL_ORDER));
        let pw = 2.0 * quad.half_width / panels as f64;
        let (mut acc, mut vsum) = (0.0, 0.0);
        for p in 0..panels {
            let lo = s0 - quad.half_width + p as f64 * pw;
            for (xi, wi) in x.iter().zip(&w) {
                let s = lo + 0.5 * pw * (xi + 1.0);
                let b = frame.boundary_point(&[s]);
                let yt = [b[0], b[1]];
                let pk = h / (PI * dist2(y, yt));
                let v = v0(yt);
                vmax = vmax.max(v.abs());
                let ww = 0.5 * pw * wi;
                acc += ww * pk * v;
                vsum += ww * v;
            }
        }
        let om = 1.0 - 2.0 / PI * (quad.half_width / h).atan();
        acc += om * match quad.far_field {
            FarField::None => 0.0,
            FarField::WindowMean => vsum / (2.0 * quad.half_width),
            FarField::Mean { value } => value,
        };
        values.push(acc);
        omitted.push(om);
    }
    let worst = omitted.iter().cloned().fold(0.0, f64::max);
    Ok(PoissonSolveReport {
        values,
        truncated_mass_bound: worst * vmax,
        omitted_mass: omitted,
        width_ok: quad.half_width >= MIN_WIDTH_RATIO * hmax,
    })
}

/// `∫_{∂Ω} P(y, ·)` over the whole boundary line, through the substitution
/// `s = s₀ + h·u/(1 − u²)` which maps `(−1, 1)` onto the line.
pub fn boundary_mass(k: &HalfPlaneKernel, y: [f64; 2]) -> Result<f64> {
    let h = k.height(y);
    if !(h > 0.0) {
        return Err(Error::invalid(format!("point {y:?} is not inside the half-plane")));
    }
    let s0 = k.frame.tangential_coords(&y)[0];
    let rule = CompositeRule::new(-1.0, 1.0, 64, PANEL_ORDER);
    let mut acc = 0.0;
    for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
        let den = 1.0 - u * u;
        let s = s0 + h * u / den;
        let jac = h * (1.0 + u * u) / (den * den);
        let b = k.frame.boundary_point(&[s]);
        acc += w * jac * poisson_kernel(k, y, [b[0], b[1]])?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundReport {
    pub samples: usize,
    /// `sup P·|y − ỹ|²/(y·n − a)`.
    pub constant: f64,
    /// `sup |∇_yP|·min(|y − ỹ|², |y − ỹ|³/(y·n − a))`.
    pub gradient_constant: f64,
    pub min_value: f64,
}

/// Sampled sup of the Poisson-kernel bound ratios.
pub fn kernel_bound_check(frame: &NormalFrame, samples: &[([f64; 2], [f64; 2])]) -> Result<KernelBoundReport> {
    let k = HalfPlaneKernel::laplacian(frame, KernelKind::Poisson)?;
    let mut rep = KernelBoundReport {
        samples: samples.len(),
        constant: 0.0,
        gradient_constant: 0.0,
        min_value: f64::INFINITY,
    };
    for &(y, yt) in samples {
        let p = poisson_kernel(&k, y, yt)?;
        let g = poisson_kernel_gradient(&k, y, yt)?;
        let h = k.height(y);
        let r2 = dist2(y, yt);
        let r = r2.sqrt();
        rep.constant = rep.constant.max(p * r2 / h);
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        rep.gradient_constant = rep.gradient_constant.max(gn * r2.min(r2 * r / h));
        rep.min_value = rep.min_value.min(p);
    }
    Ok(rep)
}

/// Interior/boundary pairs: heights `h ∈ [h_min, h_max]` (log-spaced) and
/// tangential offsets `s − s₀ ∈ [−span, span]`, offset `0` always included.
pub fn kernel_samples(frame: &NormalFrame, heights: usize, offsets: usize, h_range: (f64, f64), span: f64) -> Vec<([f64; 2], [f64; 2])> {
    let mut out = Vec::with_capacity(heights * (offsets + 1));
    let s0 = 0.37;
    for i in 0..heights {
        let f = if heights > 1 { i as f64 / (heights - 1) as f64 } else { 0.0 };
        let h = h_range.0 * (h_range.1 / h_range.0).powf(f);
        let b = frame.boundary_point(&[s0]);
        let y = [b[0] + h * frame.n[0], b[1] + h * frame.n[1]];
        let mut ds: Vec<f64> = (0..offsets)
            .map(|j| -span + 2.0 * span * j as f64 / (offsets.max(2) - 1) as f64)
            .collect();
        ds.push(0.0);
        for d in ds {
            let bt = frame.boundary_point(&[s0 + d]);
            out.push((y, [bt[0], bt[1]]));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialBump {
    /// Tangential coordinate and height of the centre.
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
}

impl RadialBump {
    pub fn eval(&self, frame: &NormalFrame, y: [f64; 2]) -> f64 {
        let c = self.center_point(frame);
        let r2 = dist2(y, c) / self.radius.powi(2);
        if r2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }

    pub fn center_point(&self, frame: &NormalFrame) -> [f64; 2] {
        let b = frame.boundary_point(&[self.center[0]]);
        [b[0] + self.center[1] * frame.n[0], b[1] + self.center[1] * frame.n[1]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreensReport {
    /// `max |u|` over the boundary samples.
    pub boundary_max: f64,
    /// `max |−Δ_h u − f|` over the interior samples (5-point stencil).
    pub laplacian_residual: f64,
    pub stencil_step: f64,
    /// `sup G·|y − ỹ|²/(hh̃)` over pairs of samples.
    pub green_bound_constant: f64,
}

/// `u(y) = ∫G(y, ỹ) f(ỹ) dỹ` in polar coordinates about `y` (the log
/// singularity sits at the origin), geometrically graded toward it.
pub fn green_potential(k: &HalfPlaneKernel, f: &RadialBump, y: [f64; 2]) -> Result<f64> {
    let c = f.center_point(&k.frame);
    let d = dist2(y, c).sqrt();
    if k.height(y) <= 0.0 {
        return Ok(0.0);
    }
    let r_lo = (d - f.radius).max(0.0);
    let r_hi = d + f.radius;
    let (x, w) = gauss_legendre(PANEL_ORDER);
    // radial breakpoints: graded toward 0 when the singularity is inside the support
    let mut breaks = vec![];
    if r_lo == 0.0 {
        let mut r = r_hi;
        breaks.push(r);
        for _ in 0..40 {
            r *= 0.5;
            breaks.push(r);
        }
        breaks.push(0.0);
        breaks.reverse();
    } else {
        breaks.push(r_lo);
        breaks.push(r_hi);
    }
    // refine the outer part uniformly
    let mut fine = vec![breaks[0]];
    for win in breaks.windows(2) {
        let pieces = (((win[1] - win[0]) / (f.radius / 8.0)).ceil() as usize).max(1);
        for p in 1..=pieces {
            fine.push(win[0] + (win[1] - win[0]) * p as f64 / pieces as f64);
        }
    }
    let n_phi = 256;
    let mut acc = 0.0;
    for win in fine.windows(2) {
        let (a, b) = (win[0], win[1]);
        for (xi, wi) in x.iter().zip(&w) {
            let r = a + 0.5 * (b - a) * (xi + 1.0);
            let wr = 0.5 * (b - a) * wi;
            let mut ring = 0.0;
            for q in 0..n_phi {
                let ph = 2.0 * PI * q as f64 / n_phi as f64;
                let yt = [y[0] + r * ph.cos(), y[1] + r * ph.sin()];
                let fv = f.eval(&k.frame, yt);
                if fv != 0.0 && k.height(yt) > 0.0 {
                    ring += green_kernel(k, y, yt)? * fv;
                }
            }
            acc += wr * r * ring * 2.0 * PI / n_phi as f64;
        }
    }
    Ok(acc)
}

/// Checks `−Δu = f` at `interior` samples and `u = 0` at `boundary` samples
/// for the Green potential of a bump, plus the sampled Green bound.
pub fn greens_identity_check(
    frame: &NormalFrame,
    f: &RadialBump,
    interior: &[[f64; 2]],
    boundary: &[[f64; 2]],
    step: f64,
) -> Result<GreensReport> {
    let k = HalfPlaneKernel::laplacian(frame, KernelKind::Green)?;
    if f.center[1] <= f.radius {
        return Err(Error::invalid("the bump must be supported away from the boundary"));
    }
    let mut boundary_max: f64 = 0.0;
    for &b in boundary {
        if k.height(b).abs() > BOUNDARY_TOL {
            return Err(Error::invalid(format!("point {b:?} is not on the boundary")));
        }
        boundary_max = boundary_max.max(green_potential(&k, f, b)?.abs());
    }
    let mut laplacian_residual: f64 = 0.0;
    for &y in interior {
        let u = |p: [f64; 2]| green_potential(&k, f, p);
        let lap = (u([y[0] + step, y[1]])? + u([y[0] - step, y[1]])? + u([y[0], y[1] + step])? + u([y[0], y[1] - step])?
            - 4.0 * u(y)?)
            / (step * step);
        laplacian_residual = laplacian_residual.max((-lap - f.eval(frame, y)).abs());
    }
    let mut green_bound_constant: f64 = 0.0;
    for (i, &a) in interior.iter().enumerate() {
        for &b in interior.iter().skip(i + 1) {
            let g = green_kernel(&k, a, b)?;
            green_bound_constant = green_bound_constant.max(g * dist2(a, b) / (k.height(a) * k.height(b)));
        }
    }
    Ok(GreensReport {
        boundary_max,
        laplacian_residual,
        stencil_step: step,
        green_bound_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_frame, golden_frame};

    fn interior(frame: &NormalFrame, s: f64, h: f64) -> [f64; 2] {
        let b = frame.boundary_point(&[s]);
        [b[0] + h * frame.n[0], b[1] + h * frame.n[1]]
    }

    fn axis() -> NormalFrame {
        build_frame(&[0.0, 1.0], 0.0).unwrap()
    }

    #[test]
    fn poisson_value_and_symmetry() {
        let k = HalfPlaneKernel::laplacian(&axis(), KernelKind::Poisson).unwrap();
        assert!((poisson_kernel(&k, [0.0, 1.0], [0.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_PI).abs() < 1e-15);
        for s in [0.3, 1.7, 12.0] {
            let a = poisson_kernel(&k, [0.0, 0.8], [s, 0.0]).unwrap();
            let b = poisson_kernel(&k, [0.0, 0.8], [-s, 0.0]).unwrap();
            assert_eq!(a, b);
        }
        assert!(poisson_kernel(&k, [0.0, -1.0], [0.0, 0.0]).is_err());
        assert!(poisson_kernel(&k, [0.0, 1.0], [0.0, 0.1]).is_err());
    }

    #[test]
    fn unit_mass_and_harmonicity() {
        let frame = golden_frame(0.4);
        let k = HalfPlaneKernel::laplacian(&frame, KernelKind::Poisson).unwrap();
        for h in [0.01, 0.3, 1.0, 7.0] {
            let b = frame.boundary_point(&[0.2]);
            let y = [b[0] + h * frame.n[0], b[1] + h * frame.n[1]];
            assert!((boundary_mass(&k, y).unwrap() - 1.0).abs() < 1e-8, "h = {h}");
        }
        let yt = frame.boundary_point(&[0.0]);
        let yt = [yt[0], yt[1]];
        let st = 1e-3;
        for (s, h) in [(0.3, 1.2), (-0.5, 2.0), (1.0, 0.9)] {
            let y = interior(&frame, s, h);
            let p = |q: [f64; 2]| poisson_kernel(&k, q, yt).unwrap();
            let lap = (p([y[0] + st, y[1]]) + p([y[0] - st, y[1]]) + p([y[0], y[1] + st]) + p([y[0], y[1] - st])
                - 4.0 * p(y))
                / (st * st);
            assert!(lap.abs() < 1e-6, "{lap}");
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let frame = golden_frame(0.0);
        let k = HalfPlaneKernel::laplacian(&frame, KernelKind::Poisson).unwrap();
        let b = frame.boundary_point(&[0.5]);
        let yt = [b[0], b[1]];
        let y = interior(&frame, 0.2, 1.3);
        let g = poisson_kernel_gradient(&k, y, yt).unwrap();
        let e = 1e-6;
        let fx = (poisson_kernel(&k, [y[0] + e, y[1]], yt).unwrap() - poisson_kernel(&k, [y[0] - e, y[1]], yt).unwrap())
            / (2.0 * e);
        assert!((g[0] - fx).abs() < 1e-8);
    }

    #[test]
    fn bound_constant_is_one_over_pi() {
        let frame = golden_frame(0.0);
        let rep = kernel_bound_check(&frame, &kernel_samples(&frame, 20, 41, (1e-3, 1e2), 50.0)).unwrap();
        assert!((rep.constant - 1.0 / PI).abs() < 1e-9);
        assert!(rep.min_value >= 0.0);
        assert!(rep.gradient_constant.is_finite() && rep.gradient_constant < 1.0);
    }

    #[test]
    fn scaling_identity() {
        let frame = build_frame(&[1.0, 2.0], 0.3).unwrap();
        let k = HalfPlaneKernel::laplacian(&frame, KernelKind::Poisson).unwrap();
        for eps in [0.5, 0.1, 1.0 / 64.0] {
            let ks = HalfPlaneKernel::laplacian(&frame.with_offset(eps * 0.3), KernelKind::Poisson).unwrap();
            let b = ks.frame.boundary_point(&[0.25]);
            let xt = [b[0], b[1]];
            let x = [xt[0] + 0.2 * frame.n[0] + 0.1, xt[1] + 0.2 * frame.n[1] - 0.05];
            let direct = poisson_kernel(&ks, x, xt).unwrap();
            let scaled = poisson_kernel_scaled(&k, eps, x, xt).unwrap();
            assert!((direct - scaled).abs() <= 1e-12 * direct, "{direct} {scaled}");
        }
    }

    #[test]
    fn harmonic_extension_of_cosine() {
        let rep = poisson_solve(
            &|y| (2.0 * PI * y[0]).cos(),
            &axis(),
            &[[0.0, 1.0], [0.5, 1.0]],
            BoundaryQuadrature {
                half_width: 100.0,
                nodes: 100_000,
                far_field: FarField::None,
            },
        )
        .unwrap();
        let e = (-2.0 * PI).exp();
        assert!((rep.values[0] - e).abs() < 1e-6);
        assert!((rep.values[1] + e).abs() < 1e-6);
        assert!(rep.width_ok);
    }

    #[test]
    fn constant_data_is_reproduced() {
        let rep = poisson_solve(
            &|_| 1.0,
            &golden_frame(0.0),
            &[interior(&golden_frame(0.0), 0.1, 0.5), interior(&golden_frame(0.0), 2.0, 3.0)],
            BoundaryQuadrature {
                half_width: 200.0,
                nodes: 0,
                far_field: FarField::WindowMean,
            },
        )
        .unwrap();
        for v in rep.values {
            assert!((v - 1.0).abs() < 1e-10);
        }
        assert!(rep.truncated_mass_bound > 0.0);
    }

    #[test]
    fn green_function_properties() {
        let frame = axis();
        let k = HalfPlaneKernel::laplacian(&frame, KernelKind::Green).unwrap();
        // vanishes on the boundary, symmetric, bounded by hh̃/(π r²)
        assert_eq!(green_kernel(&k, [0.3, 0.0], [1.0, 2.0]).unwrap(), 0.0);
        let (a, b) = ([0.1, 0.5], [1.2, 2.5]);
        assert!((green_kernel(&k, a, b).unwrap() - green_kernel(&k, b, a).unwrap()).abs() < 1e-16);
        assert!(green_kernel(&k, a, b).unwrap() <= 0.5 * 2.5 / (PI * dist2(a, b)));
    }

    #[test]
    fn greens_identity_for_bump() {
        let frame = axis();
        let bump = RadialBump {
            center: [0.0, 2.0],
            radius: 1.0,
            amplitude: 1.0,
        };
        let rep = greens_identity_check(&frame, &bump, &[[0.0, 2.0], [0.4, 1.7]], &[[0.0, 0.0], [1.5, 0.0]], 1e-2)
            .unwrap();
        assert!(rep.boundary_max < 1e-8);
        assert!(rep.laplacian_residual < 1e-4, "{}", rep.laplacian_residual);
        assert!(rep.green_bound_constant <= 1.0 / PI);
    }
}
