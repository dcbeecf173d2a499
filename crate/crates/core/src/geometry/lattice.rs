use super::frame::NormalFrame;

/// Visits every `ξ ∈ Z^d`, `0 < |ξ| ≤ radius`, lying at distance `< dist`
/// from the line spanned by the frame normal, i.e. `|Nᵀξ| < dist`.
///
/// The walk runs over the coordinate `j` where `|n_j|` is largest; for each
/// integer value of `ξ_j` the remaining coordinates lie within
/// `dist·(1 + 1/|n_j|)` of the line point with that coordinate. Points are
/// visited in increasing `ξ_j`, then increasing remaining coordinates.
pub fn for_each_near_line<F>(frame: &NormalFrame, radius: u64, dist: f64, mut visit: F)
where
    F: FnMut(&[i64], f64),
{
    let d = frame.dim();
    let n = &frame.n;
    let j = (0..d)
        .max_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
        .unwrap_or(0);
    let others: Vec<usize> = (0..d).filter(|&k| k != j).collect();
    let width = dist * (1.0 + 1.0 / n[j].abs());
    let r = radius as i64;
    let r2 = (radius as i128) * (radius as i128);
    let mut xi = [0i64; 3];
    let mut ranges = [(0i64, 0i64); 2];

    for xj in -r..=r {
        let lambda = xj as f64 / n[j];
        for (slot, &k) in others.iter().enumerate() {
            let c = lambda * n[k];
            ranges[slot] = ((c - width).floor() as i64, (c + width).ceil() as i64);
        }
        xi[j] = xj;
        let (lo0, hi0) = ranges[0];
        for x0 in lo0..=hi0 {
            xi[others[0]] = x0;
            let (lo1, hi1) = if d == 3 { ranges[1] } else { (0, 0) };
            for x1 in lo1..=hi1 {
                if d == 3 {
                    xi[others[1]] = x1;
                }
                let v = &xi[..d];
                if v.iter().all(|&c| c == 0) {
                    continue;
                }
                let n2: i128 = v.iter().map(|&c| (c as i128) * (c as i128)).sum();
                if n2 > r2 {
                    continue;
                }
                let t = frame.tangential_norm(v);
                if t < dist {
                    visit(v, t);
                }
            }
        }
    }
}

/// Visits every nonzero lattice vector in the closed ball of the given radius.
pub fn for_each_in_ball<F>(d: usize, radius: u64, mut visit: F)
where
    F: FnMut(&[i64]),
{
    let r = radius as i64;
    let r2 = (radius as i128) * (radius as i128);
    let mut xi = [0i64; 3];
    let count = (2 * r + 1).pow(d as u32);
    for idx in 0..count {
        let mut rem = idx;
        for c in xi.iter_mut().take(d) {
            *c = rem % (2 * r + 1) - r;
            rem /= 2 * r + 1;
        }
        let v = &xi[..d];
        let n2: i128 = v.iter().map(|&c| (c as i128) * (c as i128)).sum();
        if n2 == 0 || n2 > r2 {
            continue;
        }
        visit(v);
    }
}

pub fn norm_sq(xi: &[i64]) -> i128 {
    xi.iter().map(|&c| (c as i128) * (c as i128)).sum()
}

pub fn norm(xi: &[i64]) -> f64 {
    (norm_sq(xi) as f64).sqrt()
}

/// Exact test of `|ξ| > |η| + 1` on squared integer norms.
pub fn exceeds_by_more_than_one(xi_sq: i128, eta_sq: i128) -> bool {
    let gap = xi_sq - eta_sq - 1;
    gap > 0 && gap * gap > 4 * eta_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::frame::{build_frame, golden_frame};

    #[test]
    fn tube_walk_matches_ball_filter() {
        for frame in [
            golden_frame(0.0),
            build_frame(&[0.3, 1.0], 0.0).unwrap(),
            build_frame(&[1.0, 0.0], 0.0).unwrap(),
            build_frame(&[0.2, -0.5, 1.0], 0.0).unwrap(),
        ] {
            let d = frame.dim();
            let mut a = Vec::new();
            for_each_near_line(&frame, 12, 1.0, |xi, _| a.push(xi.to_vec()));
            let mut b = Vec::new();
            for_each_in_ball(d, 12, |xi| {
                if frame.tangential_norm(xi) < 1.0 {
                    b.push(xi.to_vec());
                }
            });
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn norm_gap_is_exact() {
        // |(3,4)| = 5, |(4,4)| = 5.657 and |(5,4)| = 6.403
        assert!(!exceeds_by_more_than_one(32, 25));
        assert!(exceeds_by_more_than_one(41, 25));
        // |(6,0)| = 6 = 5 + 1 is not strictly larger
        assert!(!exceeds_by_more_than_one(36, 25));
    }
}
