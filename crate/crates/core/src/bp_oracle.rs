//! Truncated Belavin–Polyakov profile: pointwise evaluation, lattice
//! topological degree, radial energies and small-wavevector transforms.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{bessel_j0_j1, bessel_k0_k1};
use crate::units::RescaledParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BPProfile {
    pub rho: f64,
    pub theta: f64,
    #[serde(rename = "L", alias = "l")]
    pub l: f64,
    #[serde(default)]
    pub center: [f64; 2],
}

impl BPProfile {
    pub fn new(rho: f64, theta: f64, l: f64) -> Result<Self> {
        let p = BPProfile {
            rho,
            theta,
            l,
            center: [0.0, 0.0],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::invalid("rho", "must be positive"));
        }
        if !(self.l > 1.0) || !self.l.is_finite() {
            return Err(Error::invalid("L", "must exceed 1"));
        }
        if !self.theta.is_finite() || !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("theta/center", "must be finite"));
        }
        Ok(())
    }

    /// Junction radius ρ√L between the BP core and the K₁ tail.
    pub fn junction(&self) -> f64 {
        self.rho * self.l.sqrt()
    }

    fn tail_amplitude(&self) -> f64 {
        let sl = self.l.sqrt();
        let k1 = bessel_k0_k1(1.0 / sl).map(|v| v.1).unwrap_or(f64::INFINITY);
        bp_f(sl) / k1
    }

    /// In-plane amplitude f_L(s) and its derivative, s = r/ρ.
    pub fn f_l(&self, s: f64) -> (f64, f64) {
        if s <= self.l.sqrt() {
            let d = 1.0 + s * s;
            (2.0 * s / d, 2.0 * (1.0 - s * s) / (d * d))
        } else {
            let x = s / self.l;
            let (k0, k1) = bessel_k0_k1(x).unwrap_or((0.0, 0.0));
            let a = self.tail_amplitude();
            (a * k1, -a / self.l * (k0 + k1 / x))
        }
    }
}

fn bp_f(s: f64) -> f64 {
    2.0 * s / (1.0 + s * s)
}

/// Magnetisation of the truncated profile at a point of the plane.
pub fn profile_value(p: &BPProfile, point: [f64; 2]) -> [f64; 3] {
    let dx = point[0] - p.center[0];
    let dy = point[1] - p.center[1];
    let r = dx.hypot(dy);
    if r == 0.0 {
        return [0.0, 0.0, 1.0];
    }
    let (f, _) = p.f_l(r / p.rho);
    let (s, c) = p.theta.sin_cos();
    let ux = (c * dx - s * dy) / r;
    let uy = (s * dx + c * dy) / r;
    let sign = if r < p.rho {
        1.0
    } else if r > p.rho {
        -1.0
    } else {
        0.0
    };
    [-f * ux, -f * uy, sign * (1.0 - f * f).max(0.0).sqrt()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeResult {
    pub degree: f64,
    pub warnings: Vec<String>,
}

/// Lattice degree (1/4π)∫ m·(∂ₓm × ∂ᵧm) on n×n cell midpoints of the square
/// [lo, hi]², with central differences of step h.
pub fn topological_degree(p: &BPProfile, n: usize, lo: f64, hi: f64) -> Result<DegreeResult> {
    p.validate()?;
    degree_of(|x| profile_value(p, x), n, lo, hi, Some(p))
}

/// Lattice degree of an arbitrary unit-vector field.
pub fn degree_of<F>(m: F, n: usize, lo: f64, hi: f64, profile: Option<&BPProfile>) -> Result<DegreeResult>
where
    F: Fn([f64; 2]) -> [f64; 3] + Sync,
{
    if n < 4 || !(hi > lo) {
        return Err(Error::invalid("grid", "need at least 4 cells and hi > lo"));
    }
    let mut warnings = Vec::new();
    if let Some(p) = profile {
        let need = 5.0 * p.rho * p.l;
        let reach = (p.center[0] - lo)
            .min(hi - p.center[0])
            .min(p.center[1] - lo)
            .min(hi - p.center[1]);
        if reach < need {
            warnings.push(format!(
                "grid reaches {reach} from the center, less than 5*rho*L = {need}; the truncated tail is cut off"
            ));
        }
    }
    let h = (hi - lo) / n as f64;
    let at = |i: isize| lo + (i as f64 + 0.5) * h;
    // field on cell midpoints plus a one-cell ring
    let w = n + 2;
    let field: Vec<[f64; 3]> = (0..w * w)
        .into_par_iter()
        .map(|idx| {
            let i = (idx % w) as isize - 1;
            let j = (idx / w) as isize - 1;
            m([at(i), at(j)])
        })
        .collect();
    let get = |i: usize, j: usize| field[j * w + i];
    let total: f64 = (1..=n)
        .into_par_iter()
        .map(|j| {
            let mut row = 0.0;
            for i in 1..=n {
                let c = get(i, j);
                let (xp, xm) = (get(i + 1, j), get(i - 1, j));
                let (yp, ym) = (get(i, j + 1), get(i, j - 1));
                let dx = [
                    (xp[0] - xm[0]) / (2.0 * h),
                    (xp[1] - xm[1]) / (2.0 * h),
                    (xp[2] - xm[2]) / (2.0 * h),
                ];
                let dy = [
                    (yp[0] - ym[0]) / (2.0 * h),
                    (yp[1] - ym[1]) / (2.0 * h),
                    (yp[2] - ym[2]) / (2.0 * h),
                ];
                let cross = [
                    dx[1] * dy[2] - dx[2] * dy[1],
                    dx[2] * dy[0] - dx[0] * dy[2],
                    dx[0] * dy[1] - dx[1] * dy[0],
                ];
                row += c[0] * cross[0] + c[1] * cross[1] + c[2] * cross[2];
            }
            row
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let degree = total * h * h / (4.0 * PI);
    if (degree - degree.round()).abs() > 0.1 {
        return Err(Error::Numeric {
            what: format!("topological degree on a {n}x{n} grid is {degree}; resolution too coarse"),
            estimate: (degree - degree.round()).abs(),
            requested: 0.1,
        });
    }
    Ok(DegreeResult { degree, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialEnergies {
    /// Dirichlet energy, including the 8π of the untruncated profile.
    pub exchange: f64,
    pub anisotropy: f64,
    pub zeeman: f64,
    pub dmi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialExpansion {
    pub exchange_excess: f64,
    pub anisotropy: f64,
    pub zeeman: f64,
    pub dmi: f64,
}

/// Leading-order large-L expressions the radial energies are compared with.
pub fn radial_expansion(p: &BPProfile, params: &RescaledParams) -> RadialExpansion {
    let g = crate::specfun::EULER_GAMMA;
    let ln4l2 = (4.0 * p.l * p.l).ln();
    let r2 = p.rho * p.rho;
    RadialExpansion {
        exchange_excess: 4.0 * PI / (p.l * p.l),
        anisotropy: 4.0 * PI * r2 * (ln4l2 - 2.0 * (1.0 + g)),
        zeeman: -4.0 * PI * params.h_bar * r2 * (ln4l2 - (1.0 + 2.0 * g)),
        dmi: -8.0 * PI * params.kappa_bar * p.rho * p.theta.cos(),
    }
}

fn radial_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

// ∫_a^∞ g(s) ds in panels of width w until the panel contribution is negligible.
fn integrate_tail<F: FnMut(f64) -> f64>(mut g: F, a: f64, w: f64, what: &str) -> Result<f64> {
    let mut sum = 0.0;
    let mut lo = a;
    for _ in 0..100_000 {
        let v = integrate(&mut g, lo, lo + w, radial_opts(), what)?;
        sum += v;
        lo += w;
        if v.abs() < 1e-17 * sum.abs().max(1e-300) || v == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::Numeric {
        what: format!("{what}: tail did not decay"),
        estimate: f64::NAN,
        requested: 1e-17,
    })
}

/// Exchange, anisotropy, Zeeman and DMI energies of the truncated profile by
/// one-dimensional radial quadrature with the junction as a breakpoint.
pub fn local_energies_radial(p: &BPProfile, params: &RescaledParams) -> Result<RadialEnergies> {
    p.validate()?;
    let sl = p.l.sqrt();
    let tw = p.l; // decay length of the tail in s
    let opts = radial_opts();

    // core: f'^2/(1-f^2) = f^2/s^2 = 4/(1+s^2)^2
    let core_ex = integrate(|s| 8.0 * s / (1.0 + s * s).powi(2), 0.0, sl, opts, "exchange core")?;
    let tail_ex = integrate_tail(
        |s| {
            let (f, fp) = p.f_l(s);
            (fp * fp / (1.0 - f * f) + f * f / (s * s)) * s
        },
        sl,
        tw,
        "exchange tail",
    )?;
    let exchange = 2.0 * PI * (core_ex + tail_ex);

    let f2 = |s: f64| {
        let (f, _) = p.f_l(s);
        f * f * s
    };
    let an_core = integrate(f2, 0.0, 1.0, opts, "anisotropy")? + integrate(f2, 1.0, sl, opts, "anisotropy")?;
    let an_tail = integrate_tail(f2, sl, tw, "anisotropy tail")?;
    let anisotropy = 2.0 * PI * p.rho * p.rho * (an_core + an_tail);

    // 1 + m∥: inside s < 1 it is 1 + √(1-f²); outside 1 - √(1-f²) = f²/(1 + √(1-f²))
    let zeeman = if params.h_bar == 0.0 {
        0.0
    } else {
        let inner = integrate(
            |s| {
                let (f, _) = p.f_l(s);
                (1.0 + (1.0 - f * f).sqrt()) * s
            },
            0.0,
            1.0,
            opts,
            "zeeman",
        )?;
        let outer = |s: f64| {
            let (f, _) = p.f_l(s);
            f * f / (1.0 + (1.0 - f * f).sqrt()) * s
        };
        let mid = integrate(outer, 1.0, sl, opts, "zeeman")?;
        let tail = integrate_tail(outer, sl, tw, "zeeman tail")?;
        -2.0 * params.h_bar * 2.0 * PI * p.rho * p.rho * (inner + mid + tail)
    };

    // f · dm∥/ds; in the core m∥ = (1 - s²)/(1 + s²)
    let dmi = if params.kappa_bar == 0.0 || p.theta.cos() == 0.0 {
        0.0
    } else {
        let core = integrate(
            |s| {
                let d = 1.0 + s * s;
                -(2.0 * s / d) * 4.0 * s / (d * d) * s
            },
            0.0,
            sl,
            opts,
            "dmi core",
        )?;
        let tail = integrate_tail(
            |s| {
                let (f, fp) = p.f_l(s);
                f * (f * fp / (1.0 - f * f).sqrt()) * s
            },
            sl,
            tw,
            "dmi tail",
        )?;
        2.0 * params.kappa_bar * p.theta.cos() * 2.0 * PI * p.rho * (core + tail)
    };

    Ok(RadialEnergies {
        exchange,
        anisotropy,
        zeeman,
        dmi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierRow {
    pub q: f64,
    pub q_rho: f64,
    /// L actually used (raised for the q → 0 limit row).
    pub l_used: f64,
    pub ratio_parallel: f64,
    pub ratio_perp: f64,
    /// qρ above 0.5: outside the small-wavevector regime.
    pub regime_violation: bool,
    pub limit_row: bool,
}

/// qρ used for the q → 0 row.
pub const LIMIT_Q_RHO: f64 = 1e-3;

/// Hankel transforms of m∥ + 1 and of the in-plane amplitude compared with
/// their small-wavevector forms 4πρ²K₀(ρq) and 4πρ²K₁(ρq).
pub fn fourier_tail_check(p: &BPProfile, q_grid: &[f64]) -> Result<Vec<FourierRow>> {
    p.validate()?;
    q_grid
        .iter()
        .map(|&q| {
            if !(q >= 0.0) || !q.is_finite() {
                return Err(Error::invalid("q", "must be non-negative and finite"));
            }
            let limit_row = q == 0.0;
            let (q_rho, l_used) = if limit_row {
                (LIMIT_Q_RHO, p.l.max(10.0 / LIMIT_Q_RHO))
            } else {
                (q * p.rho, p.l)
            };
            let prof = BPProfile { l: l_used, ..*p };
            let (par, perp) = hankel_pair(&prof, q_rho)?;
            let (k0, k1) = bessel_k0_k1(q_rho)?;
            Ok(FourierRow {
                q,
                q_rho,
                l_used,
                ratio_parallel: par / (2.0 * k0),
                ratio_perp: perp / (2.0 * k1),
                regime_violation: q_rho > 0.5,
                limit_row,
            })
        })
        .collect()
}

// Returns ∫(1 + m∥)J0(kρ s)s ds and ∫f_L J1(kρ s)s ds in s = r/ρ, so that
// the transforms are 2πρ² times these.
fn hankel_pair(p: &BPProfile, k: f64) -> Result<(f64, f64)> {
    let sl = p.l.sqrt();
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let one_plus = |s: f64, f: f64| {
        if s < 1.0 {
            1.0 + (1.0 - f * f).sqrt()
        } else {
            f * f / (1.0 + (1.0 - f * f).sqrt())
        }
    };
    let g_par = |s: f64| {
        let (f, _) = p.f_l(s);
        one_plus(s, f) * bessel_j0_j1(k * s).0 * s
    };
    let g_perp = |s: f64| {
        let (f, _) = p.f_l(s);
        f * bessel_j0_j1(k * s).1 * s
    };
    // panels: [0,1], [1, √L], then half-periods of the oscillation
    let period = PI / k;
    let mut breaks = vec![0.0, 1.0];
    let mut x = 1.0;
    while x < sl {
        x = (x + period).min(sl);
        breaks.push(x);
    }
    let mut par = 0.0;
    let mut perp = 0.0;
    for w in breaks.windows(2) {
        par += integrate(g_par, w[0], w[1], opts, "hankel transform")?;
        perp += integrate(g_perp, w[0], w[1], opts, "hankel transform")?;
    }
    let step = period.min(p.l);
    let mut lo = sl;
    let mut quiet = 0;
    for _ in 0..1_000_000 {
        let a = integrate(g_par, lo, lo + step, opts, "hankel transform")?;
        let b = integrate(g_perp, lo, lo + step, opts, "hankel transform")?;
        par += a;
        perp += b;
        lo += step;
        let env = p.f_l(lo).0 * lo;
        if env * step < 1e-14 * perp.abs().max(1e-300) && a.abs() < 1e-14 * par.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 2 {
                return Ok((par, perp));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Numeric {
        what: "hankel transform tail did not decay".into(),
        estimate: f64::NAN,
        requested: 1e-14,
    })
}
