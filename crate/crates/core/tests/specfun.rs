use std::f64::consts::{E, PI};

use proptest::prelude::*;
use skystack::specfun::*;
use skystack::Error;

// K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt by the trapezoid rule, which
// converges geometrically for this analytic, doubly decaying integrand.
fn k_trapezoid(nu: f64, x: f64) -> f64 {
    let h = 0.02;
    let t_max = (800.0 / x).acosh();
    let n = (t_max / h).ceil() as usize;
    let mut s = 0.5 * (-x).exp();
    for i in 1..=n {
        let t = i as f64 * h;
        s += (-x * t.cosh()).exp() * (nu * t).cosh();
    }
    s * h
}

// J_n(x) = (1/π)∫₀^π cos(nt − x sin t) dt; periodic integrand, trapezoid is spectral.
fn j_trapezoid(n: f64, x: f64) -> f64 {
    let m = 2000;
    let h = PI / m as f64;
    let f = |t: f64| (n * t - x * t.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..m {
        s += f(i as f64 * h);
    }
    s * h / PI
}

fn ellip_trapezoid(m: f64) -> (f64, f64) {
    let n = 400;
    let h = 0.5 * PI / n as f64;
    let (mut k, mut e) = (0.0, 0.0);
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let s = (i as f64 * h).sin();
        let q = (1.0 - m * s * s).sqrt();
        k += w / q;
        e += w * q;
    }
    (k * h, e * h)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn j0_at_zero_is_one() {
    assert_eq!(bessel_j0(0.0), 1.0);
    assert_eq!(bessel_j1(0.0), 0.0);
}

#[test]
fn x_k1_tends_to_one() {
    let x = 1e-6;
    assert!(rel(x * bessel_k1(x).unwrap(), 1.0) < 1e-6);
}

#[test]
fn k0_k1_match_integral_representation() {
    for &x in &[1e-3, 0.01, 0.3, 1.0, 1.9, 2.0, 2.1, 5.0, 17.0, 60.0, 300.0] {
        let (k0, k1) = bessel_k0_k1(x).unwrap();
        assert!(rel(k0, k_trapezoid(0.0, x)) < 2e-14, "K0({x})");
        assert!(rel(k1, k_trapezoid(1.0, x)) < 2e-14, "K1({x})");
        let (s0, s1) = bessel_k0_k1_scaled(x).unwrap();
        assert!(rel(s0, k0 * x.exp()) < 1e-14 && rel(s1, k1 * x.exp()) < 1e-14);
    }
}

#[test]
fn k0_at_one_frozen() {
    // ∫₀^∞ e^{−cosh t} dt evaluated in extended precision
    assert!(rel(bessel_k0(1.0).unwrap(), 0.42102443824070833334) < 1e-15);
    assert!(rel(bessel_k1(1.0).unwrap(), 0.60190723019723457474) < 1e-15);
}

#[test]
fn j0_j1_match_integral_representation() {
    for &x in &[0.1, 1.0, 2.5, 3.9, 4.1, 7.5, 12.0, 24.9, 25.1, 40.0, 100.0] {
        let (j0, j1) = bessel_j0_j1(x);
        assert!((j0 - j_trapezoid(0.0, x)).abs() < 1e-14, "J0({x})");
        assert!((j1 - j_trapezoid(1.0, x)).abs() < 1e-14, "J1({x})");
    }
}

#[test]
fn j0_zeros_are_roots_and_ordered() {
    assert!((j0_zero(1) - 2.404825557695773).abs() < 1e-14);
    let mut prev = 0.0;
    for k in [1, 2, 3, 10, 100, 1000, 4096, 5000] {
        let z = j0_zero(k);
        assert!(z > prev);
        prev = z;
        assert!(bessel_j0(z).abs() < 1e-14, "zero {k}");
        // McMahon: j_k ≈ β + 1/(8β), β = (k − 1/4)π
        let b = (k as f64 - 0.25) * PI;
        assert!((z - b - 1.0 / (8.0 * b)).abs() < 1e-2);
    }
}

#[test]
fn elliptic_special_values() {
    assert!((ellip_k(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
    assert!((ellip_e(0.0).unwrap() - PI / 2.0).abs() < 1e-15);
    assert_eq!(ellip_e(1.0).unwrap(), 1.0);
    assert!(matches!(ellip_k(1.0), Err(Error::Domain { .. })));
    assert!(ellip_k(1.5).is_err());
}

#[test]
fn elliptic_match_quadrature() {
    for &m in &[-2.0, -0.5, 0.0, 0.1, 0.3, 0.5, 0.8, 0.95] {
        let (k, e) = ellip_k_e(m).unwrap();
        let (kq, eq) = ellip_trapezoid(m);
        assert!(rel(k, kq) < 5e-14 && rel(e, eq) < 5e-14, "m = {m}: {k} {kq} {e} {eq}");
        let (kc, ec) = ellip_k_e_complement(1.0 - m).unwrap();
        assert!(rel(k, kc) < 1e-14 && rel(e, ec) < 1e-14);
    }
}

#[test]
fn legendre_relation() {
    let m = 0.3;
    let (k, e) = ellip_trapezoid(m);
    let (k1, e1) = ellip_trapezoid(1.0 - m);
    assert!((e * k1 + e1 * k - k * k1 - PI / 2.0).abs() < 1e-13, "oracle itself");
    let (k, e) = ellip_k_e(m).unwrap();
    let (k1, e1) = ellip_k_e(1.0 - m).unwrap();
    assert!((e * k1 + e1 * k - k * k1 - PI / 2.0).abs() < 1e-12);
}

fn w_bisect(x: f64) -> f64 {
    let (mut lo, mut hi) = (-1000.0_f64, -1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (lo * lo.exp() - x) * (mid * mid.exp() - x) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn lambert_branch_point_and_round_trip() {
    assert_eq!(lambert_w_m1(-1.0 / E).unwrap(), -1.0);
    let x = -3.0 * (-3.0_f64).exp();
    assert!((lambert_w_m1(x).unwrap() + 3.0).abs() < 1e-12);
}

#[test]
fn lambert_matches_bisection() {
    let w = lambert_w_m1(-0.1).unwrap();
    assert!((w - w_bisect(-0.1)).abs() < 1e-13);
    assert!((w + 3.577152063957297218409).abs() < 1e-14);
    for &x in &[-0.3678, -0.3, -0.2, -1e-3, -1e-10, -1e-100] {
        assert!(rel(lambert_w_m1(x).unwrap(), w_bisect(x)) < 1e-13, "x = {x}");
    }
}

#[test]
fn domain_errors() {
    assert!(matches!(bessel_k0(0.0), Err(Error::Domain { .. })));
    assert!(matches!(bessel_k1(-1.0), Err(Error::Domain { .. })));
    assert!(matches!(lambert_w_m1(0.1), Err(Error::Domain { .. })));
    assert!(matches!(lambert_w_m1(-0.5), Err(Error::Domain { .. })));
    assert!(matches!(lambert_w_m1(0.0), Err(Error::Domain { .. })));
}

#[test]
fn tags_round_trip() {
    for id in SpecialFunctionId::ALL {
        assert_eq!(SpecialFunctionId::parse(id.name()), Some(id));
    }
    assert_eq!(eval(SpecialFunctionId::Asinh, 1e-20).unwrap(), 1e-20);
    assert!((eval(SpecialFunctionId::Asinh, 1e200).unwrap() - (2e200_f64.ln())).abs() < 1e-12 * 461.0);
}

proptest! {
    #[test]
    fn k0_derivative_is_minus_k1(x in 0.05f64..50.0) {
        let h = 1e-5 * x.min(1.0);
        let d = (bessel_k0(x + h).unwrap() - bessel_k0(x - h).unwrap()) / (2.0 * h);
        prop_assert!(rel(d, -bessel_k1(x).unwrap()) < 1e-8);
    }

    #[test]
    fn bessel_bounds(x in 0.01f64..200.0) {
        let (k0, k1) = bessel_k0_k1(x).unwrap();
        prop_assert!(k1 > k0 && k0 > 0.0);
        let (j0, j1) = bessel_j0_j1(x);
        prop_assert!(j0.abs() <= 1.0 && j1.abs() <= 0.6);
    }

    #[test]
    fn lambert_inverts(w in -40.0f64..-1.0) {
        let x = w * w.exp();
        prop_assert!((lambert_w_m1(x).unwrap() - w).abs() < 1e-10 * w.abs());
    }

    #[test]
    fn elliptic_monotone(m in -5.0f64..0.99) {
        let (k, e) = ellip_k_e(m).unwrap();
        let (k2, e2) = ellip_k_e(m + 0.005).unwrap();
        prop_assert!(k2 > k && e2 < e);
    }
}
