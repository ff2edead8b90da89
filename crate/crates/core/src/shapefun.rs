//! Pair shape functions F_vv, F_ss, F_vs of the radius-ratio root α and the
//! scaled separation λ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gk21, integrate_vec, QuadOptions};
use crate::specfun::{bessel_j0, bessel_k0_k1_scaled, ellip_k_e, ellip_k_e_complement, j0_zero};

const PREF_VV: f64 = 32.0 / (3.0 * PI * PI);
const PREF_SS: f64 = 32.0 / (PI * PI);
const PREF_VS: f64 = 2.0;
const PREF_MAX: f64 = PREF_SS;

/// Below this separation the α = 1 elliptic forms lose too many digits.
pub const ALPHA1_MIN_LAMBDA: f64 = 1e-2;
/// Below this separation the α = 1 forms return the λ → 0 limit.
pub const ALPHA1_LIMIT_LAMBDA: f64 = 1e-8;
/// Half-width in t = 1 − α⁴ of the exact series around α = 1.
const LAMBDA0_SERIES_T: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeArgs {
    pub alpha: f64,
    pub lambda: f64,
}

impl ShapeArgs {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        let a = ShapeArgs { alpha, lambda };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Domain {
                function: "shape function",
                x: self.alpha,
                domain: "alpha > 0",
            });
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Domain {
                function: "shape function",
                x: self.lambda,
                domain: "lambda >= 0",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Panel budget for the whole half-line.
    pub max_intervals: usize,
    /// Hard truncation of the ξ range; `None` picks it from the tail bound.
    pub xi_max: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 4000,
            xi_max: None,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::invalid("quadrature.tol", "tolerances must be positive"));
        }
        if self.max_intervals < 2 {
            return Err(Error::invalid("quadrature.max_intervals", "must be at least 2"));
        }
        if let Some(x) = self.xi_max {
            if !(x > 0.0) {
                return Err(Error::invalid("quadrature.xi_max", "must be positive"));
            }
        }
        Ok(())
    }
}

/// All four pair factors at one (α, λ); `vs_inv` is F_vs(1/α, λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeValues {
    pub vv: f64,
    pub ss: f64,
    pub vs: f64,
    pub vs_inv: f64,
    pub err_est: f64,
}

pub fn f_vv(a: ShapeArgs, q: &QuadratureSpec) -> Result<f64> {
    shape_quadrature(a, q).map(|v| v.vv)
}

pub fn f_ss(a: ShapeArgs, q: &QuadratureSpec) -> Result<f64> {
    shape_quadrature(a, q).map(|v| v.ss)
}

pub fn f_vs(a: ShapeArgs, q: &QuadratureSpec) -> Result<f64> {
    shape_quadrature(a, q).map(|v| v.vs)
}

// Integrand in t = ξ·m, m = max(α, 1/α); components are raw (no prefactor).
fn integrand(t: f64, alpha: f64, lambda: f64, m: f64) -> [f64; 4] {
    let xi = t / m;
    if xi <= 0.0 {
        return [0.0; 4];
    }
    let (k0a, k1a) = bessel_k0_k1_scaled(alpha * xi).unwrap_or((0.0, 0.0));
    let (k0b, k1b) = bessel_k0_k1_scaled(xi / alpha).unwrap_or((0.0, 0.0));
    let env = (-(alpha + 1.0 / alpha) * xi).exp();
    if env == 0.0 {
        return [0.0; 4];
    }
    let j = if lambda == 0.0 { 1.0 } else { bessel_j0(lambda * xi) };
    let w = xi * xi * j * env / m;
    [w * k1a * k1b, w * k0a * k0b, w * k0a * k1b, w * k1a * k0b]
}

// Bound on ∫_X^∞ |integrand| dξ for each component, before prefactors.
fn tail_bound(x: f64, alpha: f64) -> f64 {
    let c = alpha + 1.0 / alpha;
    let env = (-c * x).exp();
    if env == 0.0 {
        return 0.0;
    }
    let h0 = (PI / 2.0).sqrt();
    let h1 = |y: f64| {
        let (_, k1) = bessel_k0_k1_scaled(y).unwrap_or((0.0, f64::INFINITY));
        k1 * y.sqrt()
    };
    let (ha1, hb1) = (h1(alpha * x), h1(x / alpha));
    let worst = [ha1 * hb1, h0 * h0, h0 * hb1, ha1 * h0]
        .iter()
        .fold(0.0f64, |m, v| m.max(*v));
    worst * env * (x / c + 1.0 / (c * c))
}

fn wynn_epsilon(s: &[f64]) -> f64 {
    let n = s.len();
    let mut best = s[n - 1];
    let mut prev = vec![0.0; n + 1];
    let mut cur = s.to_vec();
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                return best;
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            best = cur[cur.len() - 1];
        }
    }
    best
}

/// Evaluate all four shape integrals by panel summation between the zeros of
/// J0(λξ), with tail bound control and Wynn acceleration for fast oscillation.
pub fn shape_quadrature(a: ShapeArgs, q: &QuadratureSpec) -> Result<ShapeValues> {
    a.validate()?;
    q.validate()?;
    let ShapeArgs { alpha, lambda } = a;
    let m = alpha.max(1.0 / alpha);
    let c = alpha + 1.0 / alpha;
    let raw_tol = q.abs_tol / PREF_MAX;
    let panel_opts = QuadOptions {
        abs_tol: raw_tol / 100.0,
        rel_tol: q.rel_tol,
        max_intervals: 200,
    };
    let accelerate = lambda > 0.0 && lambda / c > 5.0;
    let t_max = q.xi_max.map(|x| x * m);

    let mut sum = [0.0f64; 4];
    let mut err = 0.0f64;
    let mut panels = 0usize;
    let mut partial: Vec<[f64; 4]> = Vec::new();
    let mut wynn_prev: Option<[f64; 4]> = None;
    let mut wynn_agree = 0;

    let mut lo = 0.0f64;
    let mut next_zero = 1usize;
    let mut env_step = 0.25f64;
    let mut env_next = 0.25f64;
    loop {
        let zero_t = if lambda > 0.0 {
            m * j0_zero(next_zero) / lambda
        } else {
            f64::INFINITY
        };
        let mut hi = env_next.min(zero_t);
        let at_zero = zero_t <= env_next;
        if let Some(tm) = t_max {
            hi = hi.min(tm);
        }
        if at_zero {
            next_zero += 1;
        }
        if hi >= env_next {
            env_step = (env_step * 2.0).min(2.0);
            env_next += env_step;
        }

        let r = integrate_vec(|t| integrand(t, alpha, lambda, m), lo, hi, panel_opts);
        if !r.converged {
            // one more attempt with plain 21-point panels on a fine split
            let mut f = |t: f64| integrand(t, alpha, lambda, m);
            let split = 64;
            let h = (hi - lo) / split as f64;
            let mut v = [0.0; 4];
            let mut e = 0.0f64;
            for i in 0..split {
                let (vi, ei) = gk21(&mut f, lo + i as f64 * h, lo + (i + 1) as f64 * h);
                for k in 0..4 {
                    v[k] += vi[k];
                    e = e.max(ei[k]);
                }
            }
            if e > raw_tol {
                return Err(Error::Numeric {
                    what: format!("shape function panel [{lo}, {hi}] at alpha={alpha}, lambda={lambda}"),
                    estimate: e * PREF_MAX,
                    requested: q.abs_tol,
                });
            }
            for k in 0..4 {
                sum[k] += v[k];
            }
            err += e;
        } else {
            for k in 0..4 {
                sum[k] += r.value[k];
            }
            err += r.error;
        }
        panels += r.intervals;

        let contrib = r.value.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let tail = tail_bound(hi / m, alpha);
        if (contrib < raw_tol / 10.0 && tail < raw_tol / 10.0) || tail == 0.0 {
            return Ok(finish(sum, err + tail));
        }
        if let Some(tm) = t_max {
            if hi >= tm {
                return Ok(finish(sum, err + tail));
            }
        }

        if accelerate && at_zero {
            partial.push(sum);
            if partial.len() >= 6 {
                let start = partial.len().saturating_sub(14);
                let mut w = [0.0; 4];
                for k in 0..4 {
                    let seq: Vec<f64> = partial[start..].iter().map(|p| p[k]).collect();
                    w[k] = wynn_epsilon(&seq);
                }
                if let Some(wp) = wynn_prev {
                    let d = (0..4).fold(0.0f64, |acc, k| acc.max((w[k] - wp[k]).abs()));
                    if d < raw_tol / 10.0 {
                        wynn_agree += 1;
                        if wynn_agree >= 2 {
                            return Ok(finish(w, err + d));
                        }
                    } else {
                        wynn_agree = 0;
                    }
                }
                wynn_prev = Some(w);
            }
        }

        if panels > q.max_intervals {
            return Err(Error::Numeric {
                what: format!("shape function at alpha={alpha}, lambda={lambda}: panel budget exhausted"),
                estimate: (err + tail) * PREF_MAX,
                requested: q.abs_tol,
            });
        }
        lo = hi;
    }
}

fn finish(raw: [f64; 4], raw_err: f64) -> ShapeValues {
    ShapeValues {
        vv: PREF_VV * raw[0],
        ss: PREF_SS * raw[1],
        vs: PREF_VS * raw[2],
        vs_inv: PREF_VS * raw[3],
        err_est: PREF_MAX * raw_err,
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain {
            function: "shape function at lambda = 0",
            x: alpha,
            domain: "alpha > 0",
        });
    }
    Ok(())
}

// Taylor coefficients of 2K/π and 2E/π in m.
fn elliptic_series_coeffs(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut k = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n);
    let mut poch_half = 1.0; // (1/2)_j / j!
    let mut poch_mhalf = 1.0; // (-1/2)_j / j!
    for j in 0..n {
        if j > 0 {
            let jf = j as f64;
            poch_half *= (jf - 0.5) / jf;
            poch_mhalf *= (jf - 1.5) / jf;
        }
        k.push(poch_half * poch_half);
        e.push(poch_half * poch_mhalf);
    }
    (k, e)
}

const SERIES_TERMS: usize = 64;

fn lambda0_series(t: f64) -> (f64, f64) {
    let (k, e) = elliptic_series_coeffs(SERIES_TERMS + 2);
    let mut vv = 0.0;
    let mut ss = 0.0;
    let mut tn = 1.0;
    for n in 2..SERIES_TERMS + 2 {
        let d = 2.0 * e[n] - e[n - 1] - 2.0 * k[n] + 2.0 * k[n - 1];
        let g = 2.0 * k[n] - k[n - 1] - 2.0 * e[n];
        vv += d * tn;
        ss += g * tn;
        tn *= t;
    }
    (8.0 / 3.0 * (1.0 - t).powf(0.25) * vv, 8.0 * (1.0 - t).powf(0.75) * ss)
}

// vv and ss closed forms for 0 < α ≤ 1.
fn lambda0_vv_ss_le1(alpha: f64) -> Result<(f64, f64)> {
    let a4 = alpha.powi(4);
    let t = 1.0 - a4;
    if t <= LAMBDA0_SERIES_T {
        return Ok(lambda0_series(t));
    }
    let (k, e) = ellip_k_e_complement(a4)?;
    let den = (a4 - 1.0) * (a4 - 1.0);
    let vv = 16.0 * alpha * ((a4 + 1.0) * e - 2.0 * a4 * k) / (3.0 * PI * den);
    let ss = 16.0 * alpha.powi(3) * ((a4 + 1.0) * k - 2.0 * e) / (PI * den);
    Ok((vv, ss))
}

pub fn f_vv_lambda0(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    lambda0_vv_ss_le1(alpha.min(1.0 / alpha)).map(|v| v.0)
}

pub fn f_ss_lambda0(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    lambda0_vv_ss_le1(alpha.min(1.0 / alpha)).map(|v| v.1)
}

pub fn f_vs_lambda0(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a4 = alpha.powi(4);
    let t = 1.0 - a4;
    if t.abs() <= LAMBDA0_SERIES_T {
        let mut s = 0.0;
        let mut tn = 1.0;
        for n in 0..SERIES_TERMS {
            s += tn / (n as f64 + 2.0);
            tn *= t;
        }
        return Ok(2.0 * alpha.powi(3) * s);
    }
    Ok(2.0 * alpha.powi(3) * (a4 - 4.0 * alpha.ln() - 1.0) / (t * t))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain {
            function: "shape function at alpha = 1",
            x: lambda,
            domain: "lambda >= 0",
        });
    }
    Ok(())
}

fn alpha1_fallback(lambda: f64) -> Result<ShapeValues> {
    let q = QuadratureSpec {
        abs_tol: 1e-13,
        ..QuadratureSpec::default()
    };
    shape_quadrature(ShapeArgs { alpha: 1.0, lambda }, &q)
}

fn alpha1_elliptic(lambda: f64) -> Result<(f64, f64)> {
    let l2 = lambda * lambda;
    let s = (l2 + 4.0).sqrt();
    let (k, e) = ellip_k_e(0.5 - 0.25 * s)?;
    let pre = 32.0 / (PI * PI * l2 * s.powi(3));
    let vv = pre / 3.0
        * ((l2 * s + 4.0 * s + 8.0) * k * k - 4.0 * (l2 * s + 2.0 * s + 4.0) * k * e + 4.0 * (l2 + 2.0) * s * e * e);
    let ss = -pre * (((s + 4.0) * l2 + 4.0 * (s + 2.0)) * k * k - 8.0 * (l2 + s + 2.0) * k * e + 8.0 * s * e * e);
    Ok((vv, ss))
}

pub fn f_vv_alpha1(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda < ALPHA1_LIMIT_LAMBDA {
        Ok(1.0)
    } else if lambda < ALPHA1_MIN_LAMBDA {
        alpha1_fallback(lambda).map(|v| v.vv)
    } else {
        alpha1_elliptic(lambda).map(|v| v.0)
    }
}

pub fn f_ss_alpha1(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda < ALPHA1_LIMIT_LAMBDA {
        Ok(1.0)
    } else if lambda < ALPHA1_MIN_LAMBDA {
        alpha1_fallback(lambda).map(|v| v.ss)
    } else {
        alpha1_elliptic(lambda).map(|v| v.1)
    }
}

pub fn f_vs_alpha1(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if lambda < ALPHA1_LIMIT_LAMBDA {
        return Ok(1.0);
    }
    let l2 = lambda * lambda;
    let s2 = l2 + 4.0;
    Ok(2.0 * (1.0 / s2 + 4.0 * (0.5 * lambda).asinh() / (lambda * s2 * s2.sqrt())))
}

/// Pair factors using closed forms where they apply and quadrature otherwise.
pub fn shape_values(a: ShapeArgs, q: &QuadratureSpec) -> Result<ShapeValues> {
    a.validate()?;
    if a.lambda == 0.0 {
        return Ok(ShapeValues {
            vv: f_vv_lambda0(a.alpha)?,
            ss: f_ss_lambda0(a.alpha)?,
            vs: f_vs_lambda0(a.alpha)?,
            vs_inv: f_vs_lambda0(1.0 / a.alpha)?,
            err_est: 0.0,
        });
    }
    if a.alpha == 1.0 && a.lambda >= ALPHA1_MIN_LAMBDA {
        let (vv, ss) = alpha1_elliptic(a.lambda)?;
        let vs = f_vs_alpha1(a.lambda)?;
        return Ok(ShapeValues {
            vv,
            ss,
            vs,
            vs_inv: vs,
            err_est: 0.0,
        });
    }
    shape_quadrature(a, q)
}
