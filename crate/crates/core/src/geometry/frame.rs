use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::dd;

use crate::error::{Error, Result};

/// Orthonormal frame attached to a boundary direction.
///
/// `m` is stored row-major; its last column is the unit normal `n` and its
/// first `d-1` columns form the tangential matrix `N`. Frames built from a
/// slope carry a low-order correction of `N` so that `Nᵀξ` can be evaluated
/// well below double precision for large lattice vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFrame {
    pub n: Vec<f64>,
    pub m: Vec<Vec<f64>>,
    pub a: f64,
    /// Low-order parts of the tangential columns, `tangent_lo[c][i]` for column `c`.
    pub tangent_lo: Vec<Vec<f64>>,
}

const GRAM_SCHMIDT_PIVOT_TOL: f64 = 1e-8;

/// Completes `n_raw / |n_raw|` to an orthonormal basis by Gram–Schmidt on
/// the canonical vectors, taking them in index order and skipping those whose
/// residual is at most `1e-8`.
pub fn build_frame(n_raw: &[f64], a: f64) -> Result<NormalFrame> {
    let d = n_raw.len();
    if !(2..=3).contains(&d) {
        return Err(Error::invalid(format!("dimension {d} not supported (expected 2 or 3)")));
    }
    if n_raw.iter().any(|x| !x.is_finite()) || !a.is_finite() {
        return Err(Error::invalid("normal vector and offset must be finite"));
    }
    let norm = n_raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::invalid("normal vector must be nonzero"));
    }
    let n: Vec<f64> = n_raw.iter().map(|x| x / norm).collect();

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in 0..d {
        if basis.len() == d - 1 {
            break;
        }
        let mut r = vec![0.0; d];
        r[k] = 1.0;
        for q in basis.iter().chain(std::iter::once(&n)) {
            let proj = dot(&r, q);
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= proj * qi;
            }
        }
        let rn = dot(&r, &r).sqrt();
        if rn > GRAM_SCHMIDT_PIVOT_TOL {
            // second pass keeps the basis orthogonal to machine precision
            for q in basis.iter().chain(std::iter::once(&n)) {
                let proj = dot(&r, q);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= proj * qi;
                }
            }
            let rn = dot(&r, &r).sqrt();
            basis.push(r.into_iter().map(|x| x / rn).collect());
        }
    }
    debug_assert_eq!(basis.len(), d - 1);

    let mut m = vec![vec![0.0; d]; d];
    for (c, col) in basis.iter().chain(std::iter::once(&n)).enumerate() {
        for i in 0..d {
            m[i][c] = col[i];
        }
    }
    Ok(NormalFrame {
        n,
        m,
        a,
        tangent_lo: vec![vec![0.0; d]; d - 1],
    })
}

/// Two-dimensional frame whose tangent is `(1, slope)/√(1+slope²)`, computed
/// in double-double arithmetic. The normal is `(-slope, 1)/√(1+slope²)`,
/// which is what [`build_frame`] produces for that normal.
pub fn frame_from_slope(slope: TwoFloat, a: f64) -> Result<NormalFrame> {
    if !slope.hi().is_finite() {
        return Err(Error::invalid("slope must be finite"));
    }
    let one = TwoFloat::from(1.0);
    let s = (one + slope * slope).sqrt();
    let t1 = dd::recip(s);
    let t2 = dd::div(slope, s);
    let (n1, n2) = (-t2.hi(), t1.hi());
    Ok(NormalFrame {
        n: vec![n1, n2],
        m: vec![vec![t1.hi(), n1], vec![t2.hi(), n2]],
        a,
        tangent_lo: vec![vec![t1.lo(), t2.lo()]],
    })
}

/// Golden-ratio frame: tangent `(1, φ)/√(1+φ²)`.
pub fn golden_frame(a: f64) -> NormalFrame {
    let five = TwoFloat::from(5.0);
    let phi = (TwoFloat::from(1.0) + five.sqrt()) * 0.5;
    frame_from_slope(phi, a).expect("golden slope is finite")
}

impl NormalFrame {
    pub fn dim(&self) -> usize {
        self.n.len()
    }

    /// Column `c` of the tangential matrix `N`.
    pub fn tangent(&self, c: usize) -> Vec<f64> {
        self.m.iter().map(|row| row[c]).collect()
    }

    /// The tangential matrix `N` (d × (d-1)), row-major.
    pub fn tangential_matrix(&self) -> Vec<Vec<f64>> {
        self.m.iter().map(|row| row[..self.dim() - 1].to_vec()).collect()
    }

    /// `Nᵀξ` for an integer vector, accumulated in double-double.
    pub fn tangential_components(&self, xi: &[i64]) -> Vec<f64> {
        let d = self.dim();
        (0..d - 1)
            .map(|c| {
                let mut acc = TwoFloat::from(0.0);
                for i in 0..d {
                    let coef = TwoFloat::new_add(self.m[i][c], self.tangent_lo[c][i]);
                    acc += coef * (xi[i] as f64);
                }
                acc.hi() + acc.lo()
            })
            .collect()
    }

    /// `|Nᵀξ|`, the distance from `ξ` to the line spanned by `n`.
    pub fn tangential_norm(&self, xi: &[i64]) -> f64 {
        self.tangential_components(xi)
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// `Nᵀx` for a real vector.
    pub fn tangential_coords(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d - 1)
            .map(|c| (0..d).map(|i| self.m[i][c] * x[i]).sum())
            .collect()
    }

    pub fn normal_component(&self, x: &[f64]) -> f64 {
        dot(&self.n, x)
    }

    /// `M z` for rotated coordinates `z`.
    pub fn to_physical(&self, z: &[f64]) -> Vec<f64> {
        self.m.iter().map(|row| dot(row, z)).collect()
    }

    /// `Mᵀ y`.
    pub fn to_rotated(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|c| (0..d).map(|i| self.m[i][c] * y[i]).sum()).collect()
    }

    /// Point of the boundary `{y·n = a}` with tangential coordinates `s`.
    pub fn boundary_point(&self, s: &[f64]) -> Vec<f64> {
        let mut z = s.to_vec();
        z.push(self.a);
        self.to_physical(&z)
    }

    /// Same frame with a different boundary offset.
    pub fn with_offset(&self, a: f64) -> Self {
        NormalFrame { a, ..self.clone() }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_orthonormal(f: &NormalFrame) {
        let d = f.dim();
        for i in 0..d {
            for j in 0..d {
                let mtm: f64 = (0..d).map(|k| f.m[k][i] * f.m[k][j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((mtm - id).abs() < 1e-12, "MᵀM[{i}][{j}] = {mtm}");
            }
            assert!((f.m[i][d - 1] - f.n[i]).abs() < 1e-12);
        }
        assert!((dot(&f.n, &f.n).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_axis() {
        let f = build_frame(&[0.0, 1.0], 0.0).unwrap();
        assert_eq!(f.n, vec![0.0, 1.0]);
        assert_eq!(f.m, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn normalizes_and_keeps_offset() {
        let f = build_frame(&[0.0, 2.0], 3.0).unwrap();
        assert_eq!(f.n, vec![0.0, 1.0]);
        assert_eq!(f.m, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(f.a, 3.0);
    }

    #[test]
    fn diagonal_direction() {
        let f = build_frame(&[1.0, 1.0], 0.0).unwrap();
        check_orthonormal(&f);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f.m[0][0] - s).abs() < 1e-15 && (f.m[1][0] + s).abs() < 1e-15);
    }

    #[test]
    fn three_dimensional() {
        let f = build_frame(&[1.0, 2.0, 3.0], 0.5).unwrap();
        check_orthonormal(&f);
        let f = build_frame(&[1.0, 0.0, 0.0], 0.0).unwrap();
        check_orthonormal(&f);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(matches!(build_frame(&[0.0, 0.0], 0.0), Err(Error::InvalidInput(_))));
        assert!(build_frame(&[1.0], 0.0).is_err());
    }

    #[test]
    fn slope_frame_agrees_with_gram_schmidt() {
        let l = 0.3;
        let a = frame_from_slope(TwoFloat::from(l), 0.0).unwrap();
        let b = build_frame(&[-l, 1.0], 0.0).unwrap();
        check_orthonormal(&a);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.m[i][j] - b.m[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn golden_tangent() {
        let f = golden_frame(0.0);
        check_orthonormal(&f);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let r = f.tangential_norm(&[1, 0]);
        assert!((r - 1.0 / (1.0 + phi * phi).sqrt()).abs() < 1e-15);
        assert!((r - 0.5257311).abs() < 1e-7);
    }

    #[test]
    fn rotation_roundtrip() {
        let f = build_frame(&[0.3, -0.7, 0.2], 0.0).unwrap();
        let y = [0.1, 2.0, -1.5];
        let back = f.to_physical(&f.to_rotated(&y));
        for i in 0..3 {
            assert!((back[i] - y[i]).abs() < 1e-14);
        }
    }
}
