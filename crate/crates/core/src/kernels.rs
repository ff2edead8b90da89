//! Interlayer interaction kernels for two layers of thickness δ whose
//! bottoms are offset by uδ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    VV,
    VS,
    SS,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::VV => "VV",
            KernelKind::VS => "VS",
            KernelKind::SS => "SS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "VV" => Some(KernelKind::VV),
            "VS" => Some(KernelKind::VS),
            "SS" => Some(KernelKind::SS),
            _ => None,
        }
    }
}

const FOUR_PI: f64 = 4.0 * PI;
// Use the multipole series once δ/√(r²+u²δ²) drops below this.
const SERIES_RATIO: f64 = 0.5;
const SMALL_R: f64 = 1e-6;

fn check_args(u: f64, delta: f64, r: f64) -> Result<()> {
    if !u.is_finite() {
        return Err(Error::invalid("u", "must be finite"));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid("delta", "must be positive and finite"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain {
            function: "kernel",
            x: r,
            domain: "r > 0",
        });
    }
    Ok(())
}

/// Closed-form kernel value.
pub fn kernel_exact(kind: KernelKind, u: f64, delta: f64, r: f64) -> Result<f64> {
    check_args(u, delta, r)?;
    let c = u * delta;
    let big_r = r.hypot(c);
    if delta < SERIES_RATIO * big_r {
        return Ok(multipole(kind, c, delta, big_r));
    }
    if r < SMALL_R * delta {
        return Ok(small_r(kind, u, delta, r));
    }
    let cs = [(u + 1.0) * delta, (u - 1.0) * delta, c];
    Ok(match kind {
        KernelKind::VV => {
            let phi = |c: f64| c * (c / r).asinh() - r.hypot(c);
            (phi(cs[0]) + phi(cs[1]) - 2.0 * phi(cs[2])) / FOUR_PI
        }
        KernelKind::VS => {
            let a = |c: f64| (c / r).asinh();
            (2.0 * a(cs[2]) - a(cs[0]) - a(cs[1])) / FOUR_PI
        }
        KernelKind::SS => {
            let f = |c: f64| 1.0 / r.hypot(c);
            (2.0 * f(cs[2]) - f(cs[0]) - f(cs[1])) / FOUR_PI
        }
    })
}

/// Volume–surface kernel with the roles of the layers exchanged.
pub fn kernel_sv(u: f64, delta: f64, r: f64) -> Result<f64> {
    kernel_exact(KernelKind::VS, -u, delta, r)
}

// Expansion of 1/√(r²+(c+h)²) in Legendre polynomials of c/R, |h| ≤ δ < R.
fn multipole(kind: KernelKind, c: f64, delta: f64, big_r: f64) -> f64 {
    let x = c / big_r;
    let q = delta / big_r;
    let mut p_prev = 1.0;
    let mut p = x;
    let mut qn = q; // q^n
    let mut sum = 0.0;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let pn = if n == 1 { x } else { p };
        let term = match kind {
            KernelKind::VV if n % 2 == 0 => qn * q * q * pn / ((nf + 1.0) * (nf + 2.0)),
            KernelKind::VS if n % 2 == 1 => qn * q * pn / (nf + 1.0),
            KernelKind::SS if n % 2 == 0 => -qn * pn,
            _ => 0.0,
        };
        sum += term;
        if n > 2 && qn < 1e-18 {
            break;
        }
        let next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = next;
        qn *= q;
        n += 1;
    }
    match kind {
        // n = 0 term of the vv sum
        KernelKind::VV => (q * q / 2.0 + sum) * 2.0 * big_r / FOUR_PI,
        KernelKind::VS => sum * 2.0 / FOUR_PI,
        KernelKind::SS => sum * 2.0 / (FOUR_PI * big_r),
    }
}

// r ≪ δ: expand each term in r with the ln r pieces collected.
fn small_r(kind: KernelKind, u: f64, delta: f64, r: f64) -> f64 {
    let ln_r = r.ln();
    let terms = [((u + 1.0) * delta, 1.0), ((u - 1.0) * delta, 1.0), (u * delta, -2.0)];
    let mut sum = 0.0;
    let mut log_coef = 0.0;
    for (c, w) in terms {
        let a = c.abs();
        match kind {
            KernelKind::VV => {
                // c asinh(c/r) - √(r²+c²)
                if a == 0.0 {
                    sum -= w * r;
                } else {
                    sum += w * (a * (2.0 * a).ln() + r * r / (4.0 * a) - a - r * r / (2.0 * a));
                    log_coef -= w * a;
                }
            }
            KernelKind::VS => {
                if a > 0.0 {
                    let s = c.signum();
                    sum -= w * s * ((2.0 * a).ln() + r * r / (4.0 * a * a));
                    log_coef += w * s;
                }
            }
            KernelKind::SS => {
                let v = if a == 0.0 { 1.0 / r } else { 1.0 / r.hypot(a) };
                sum -= w * v;
            }
        }
    }
    (sum + log_coef * ln_r) / FOUR_PI
}

/// Kernel evaluated from its defining z-integrals by adaptive quadrature.
pub fn kernel_oracle(kind: KernelKind, u: f64, delta: f64, r: f64) -> Result<f64> {
    check_args(u, delta, r)?;
    // absolute tolerance scaled to the integrand size, which grows as r → 0
    let scale = match kind {
        KernelKind::VV => delta * delta / r.max(delta),
        KernelKind::VS => delta / r.max(delta),
        KernelKind::SS => 100.0 * (1.0 + delta / (r * r)),
    };
    let opts = QuadOptions {
        abs_tol: 1e-15 * scale,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    let c = u * delta;
    let inv = |s: f64| 1.0 / (r * r + s * s).sqrt();
    let v = match kind {
        KernelKind::VV => integrate(
            |z| {
                let inner = integrate(|zp| inv(z - zp), c, c + delta, opts, "kernel oracle (inner)");
                inner.unwrap_or(f64::NAN)
            },
            0.0,
            delta,
            opts,
            "kernel oracle",
        )?,
        KernelKind::VS => {
            integrate(|z| inv(z - c), 0.0, delta, opts, "kernel oracle")?
                - integrate(|z| inv(z - c - delta), 0.0, delta, opts, "kernel oracle")?
        }
        KernelKind::SS => {
            let g = |s: f64| -(2.0 * s * s - r * r) / (r * r + s * s).powf(2.5);
            let inner = QuadOptions {
                abs_tol: 1e-13 * (1.0 + 1.0 / (r * r)),
                ..opts
            };
            integrate(
                |z| integrate(|zp| g(z - zp), c, c + delta, inner, "kernel oracle (inner)").unwrap_or(f64::NAN),
                0.0,
                delta,
                opts,
                "kernel oracle",
            )?
        }
    };
    Ok(v / FOUR_PI)
}

/// Surface–volume kernel from its own defining integral.
pub fn kernel_sv_oracle(u: f64, delta: f64, r: f64) -> Result<f64> {
    check_args(u, delta, r)?;
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 2000,
    };
    let c = u * delta;
    let inv = |s: f64| 1.0 / (r * r + s * s).sqrt();
    let v = integrate(|zp| inv(zp + c), 0.0, delta, opts, "kernel oracle")?
        - integrate(|zp| inv(zp - delta + c), 0.0, delta, opts, "kernel oracle")?;
    Ok(v / FOUR_PI)
}

/// ∫ K d²r over the plane.
pub fn kernel_moment(kind: KernelKind, u: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", "must be positive"));
    }
    match kind {
        KernelKind::SS => Ok(if u.abs() <= 1.0 { delta * (1.0 - u.abs()) } else { 0.0 }),
        KernelKind::VS => {
            if u == 0.0 {
                Ok(0.0)
            } else if u.abs() > 1.0 {
                Ok(0.5 * delta * delta * u.signum())
            } else {
                Err(Error::UnsupportedRegime(format!(
                    "volume-surface moment is only available for |u| > 1 (got u = {u})"
                )))
            }
        }
        KernelKind::VV => Err(Error::UnsupportedRegime(
            "the volume-volume kernel decays like 1/r and has no finite moment".into(),
        )),
    }
}

/// Leading small-δ behaviour.
pub fn kernel_asymptotic(kind: KernelKind, u: f64, delta: f64, r: f64) -> Result<f64> {
    check_args(u, delta, r)?;
    Ok(match kind {
        KernelKind::VV => delta * delta / (FOUR_PI * r),
        KernelKind::VS => u * delta.powi(3) / (FOUR_PI * r.powi(3)),
        KernelKind::SS => delta * delta / (FOUR_PI * r.powi(3)),
    })
}
