use std::f64::consts::{FRAC_2_PI, PI};
use std::sync::OnceLock;

use super::{domain, EULER_GAMMA};
use crate::error::Result;

pub fn bessel_k0(x: f64) -> Result<f64> {
    bessel_k0_k1(x).map(|(k0, _)| k0)
}

pub fn bessel_k1(x: f64) -> Result<f64> {
    bessel_k0_k1(x).map(|(_, k1)| k1)
}

/// K0(x) and K1(x) together.
pub fn bessel_k0_k1(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("K0/K1", x, "x > 0"));
    }
    if x <= 2.0 {
        return Ok(k_series(x));
    }
    let (k0, k1) = k_steed(x);
    let e = (-x).exp();
    Ok((k0 * e, k1 * e))
}

/// e^x K0(x) and e^x K1(x); no underflow for large x.
pub fn bessel_k0_k1_scaled(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("K0/K1", x, "x > 0"));
    }
    if x <= 2.0 {
        let (k0, k1) = k_series(x);
        let e = x.exp();
        Ok((k0 * e, k1 * e))
    } else {
        Ok(k_steed(x))
    }
}

// Ascending series, 0 < x <= 2.
fn k_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let lnh = (0.5 * x).ln();

    let mut i0 = 1.0;
    let mut i1s = 1.0;
    let mut s0 = 0.0;
    let mut s1 = -2.0 * EULER_GAMMA + 1.0;
    // term0 = t^k/(k!)^2, term1 = t^k/(k!(k+1)!)
    let mut term0 = 1.0;
    let mut term1 = 1.0;
    let mut h = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term0 *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        h += 1.0 / kf;
        let hn = h + 1.0 / (kf + 1.0);
        i0 += term0;
        i1s += term1;
        s0 += term0 * h;
        s1 += term1 * (h + hn - 2.0 * EULER_GAMMA);
        if term0 < 1e-18 * i0 && term1 < 1e-18 * i1s {
            break;
        }
    }
    let k0 = -(lnh + EULER_GAMMA) * i0 + s0;
    let i1 = 0.5 * x * i1s;
    let k1 = 1.0 / x + lnh * i1 - 0.25 * x * s1;
    (k0, k1)
}

// Steed's continued fraction (Temme's method) for x > 2, order zero.
// Returns exponentially scaled values.
fn k_steed(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..1000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j0_j1(x).0
}

pub fn bessel_j1(x: f64) -> f64 {
    bessel_j0_j1(x).1
}

/// J0(x) and J1(x) together, any real x.
pub fn bessel_j0_j1(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (j0, j1) = if ax <= 4.0 {
        j_series(ax)
    } else if ax <= 25.0 {
        j_miller(ax)
    } else {
        j_hankel(ax)
    };
    (j0, if x < 0.0 { -j1 } else { j1 })
}

fn j_series(x: f64) -> (f64, f64) {
    let t = -0.25 * x * x;
    let mut term0 = 1.0;
    let mut term1 = 1.0;
    let mut s0 = 1.0;
    let mut s1 = 1.0;
    for k in 1..40 {
        let kf = k as f64;
        term0 *= t / (kf * kf);
        term1 *= t / (kf * (kf + 1.0));
        s0 += term0;
        s1 += term1;
        if term0.abs() < 1e-18 && term1.abs() < 1e-18 {
            break;
        }
    }
    (s0, 0.5 * x * s1)
}

// Backward recurrence normalised by J0 + 2 sum J_2k = 1.
fn j_miller(x: f64) -> (f64, f64) {
    let start = (x + 20.0 + (40.0 * x).sqrt()) as usize;
    let m = start + (start & 1);
    let mut jp = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    for k in (1..=m).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
        }
        let order = k - 1;
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    (j / norm, jp / norm)
}

fn j_hankel(x: f64) -> (f64, f64) {
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(1.0, x);
    let (s, c) = x.sin_cos();
    let amp = (FRAC_2_PI / x).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
    // cos(x - pi/4) = (c + s)/sqrt2, sin(x - pi/4) = (s - c)/sqrt2
    let j0 = amp * (p0 * (c + s) - q0 * (s - c));
    // cos(x - 3pi/4) = (s - c)/sqrt2, sin(x - 3pi/4) = -(s + c)/sqrt2
    let j1 = amp * (p1 * (s - c) + q1 * (s + c));
    (j0, j1)
}

fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() > prev {
            break;
        }
        prev = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

const ZERO_TABLE: usize = 4096;

fn zero_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (1..=ZERO_TABLE).map(compute_j0_zero).collect())
}

fn compute_j0_zero(k: usize) -> f64 {
    let beta = (k as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    let mut z = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3)) + 120_928.0 / (15.0 * b8.powi(5));
    for _ in 0..6 {
        let (j0, j1) = bessel_j0_j1(z);
        let dz = j0 / j1;
        z += dz;
        if dz.abs() < 1e-16 * z {
            break;
        }
    }
    z
}

/// k-th positive zero of J0 (k = 1, 2, ...).
pub fn j0_zero(k: usize) -> f64 {
    assert!(k >= 1, "zeros are numbered from 1");
    if k <= ZERO_TABLE {
        zero_table()[k - 1]
    } else {
        compute_j0_zero(k)
    }
}
