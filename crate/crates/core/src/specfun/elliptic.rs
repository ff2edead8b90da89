use std::f64::consts::FRAC_PI_2;

use super::domain;
use crate::error::Result;

/// Complete elliptic integral of the first kind, parameter m (= k²).
pub fn ellip_k(m: f64) -> Result<f64> {
    if !(m < 1.0) || m.is_nan() {
        return Err(domain("EllipticK", m, "m < 1"));
    }
    Ok(agm_k_e(m).0)
}

/// Complete elliptic integral of the second kind, parameter m (= k²).
pub fn ellip_e(m: f64) -> Result<f64> {
    if !(m <= 1.0) || m.is_nan() {
        return Err(domain("EllipticE", m, "m <= 1"));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok(agm_k_e(m).1)
}

/// K(m) and E(m) from one AGM sweep.
pub fn ellip_k_e(m: f64) -> Result<(f64, f64)> {
    if !(m < 1.0) || m.is_nan() {
        return Err(domain("EllipticK", m, "m < 1"));
    }
    Ok(agm_k_e(m))
}

/// K and E given the complementary parameter m1 = 1 − m, which keeps full
/// relative precision when m is close to 1.
pub fn ellip_k_e_complement(m1: f64) -> Result<(f64, f64)> {
    if !(m1 > 0.0) || !m1.is_finite() {
        return Err(domain("EllipticK", 1.0 - m1, "m < 1"));
    }
    Ok(agm(1.0 - m1, m1))
}

fn agm_k_e(m: f64) -> (f64, f64) {
    agm(m, 1.0 - m)
}

fn agm(m: f64, m1: f64) -> (f64, f64) {
    if m == 0.0 {
        return (FRAC_PI_2, FRAC_PI_2);
    }
    let mut a = 1.0;
    let mut b = m1.sqrt();
    let mut sum = 0.5 * m;
    let mut pow = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        let term = pow * c * c;
        sum += term;
        if term <= 1e-18 * sum {
            break;
        }
    }
    let k = FRAC_PI_2 / a;
    (k, k * (1.0 - sum))
}
