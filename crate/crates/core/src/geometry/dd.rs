//! Correctly rounded double-double division on top of `twofloat`, whose own
//! quotient keeps only about one double of accuracy.

use twofloat::TwoFloat;

/// `a / b` to double-double accuracy (two Newton corrections).
pub fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q0 = a.hi() / b.hi();
    let r = a - b * TwoFloat::from(q0);
    let q = TwoFloat::new_add(q0, r.hi() / b.hi());
    let r = a - b * q;
    q + TwoFloat::from(r.hi() / b.hi())
}

pub fn recip(b: TwoFloat) -> TwoFloat {
    div(TwoFloat::from(1.0), b)
}

/// `10^{-k}` in double-double.
pub fn pow10_neg(k: u32) -> TwoFloat {
    let mut p = TwoFloat::from(1.0);
    let mut left = k;
    while left > 0 {
        let step = left.min(15);
        p *= TwoFloat::from(10f64.powi(step as i32));
        left -= step;
    }
    recip(p)
}
