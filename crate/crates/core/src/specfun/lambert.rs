use std::f64::consts::E;

use super::domain;
use crate::error::Result;

const BRANCH: f64 = -1.0 / E;

/// Lower real branch W₋₁ of the inverse of w·e^w, for x in [-1/e, 0).
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    if !(x < 0.0) || x < BRANCH * (1.0 + 4.0 * f64::EPSILON) {
        return Err(domain("LambertWm1", x, "-1/e <= x < 0"));
    }
    let q = E * x + 1.0;
    if q <= 0.0 {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = -(2.0 * q).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let wn = w - dw;
        // stay on the lower branch
        w = if wn > -1.0 { 0.5 * (w - 1.0) } else { wn };
        if dw.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    Ok(w)
}
