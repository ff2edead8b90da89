//! Minimisation of the reduced stack energy.

mod nelder_mead;
mod scan;

pub use nelder_mead::{brent_min, nelder_mead, Bounds, NmOptions, NmResult};
pub use scan::{
    asymmetric_check, landscape_grid, separation_scan, separation_scan_with, AsymmetricCheck, LandscapeCell,
    LandscapeGrid, ScanOptions, ScanRow,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boxqp::minimize_box_qp;
use crate::energy::{
    bilayer_f_unchecked, energy_gradient_fd, energy_reduced_with, normalize_angle, reduced_local, SkyrmionLayerParams,
    SkyrmionStack,
};
use crate::error::{Error, Result};
use crate::shapefun::{shape_values, QuadratureSpec, ShapeArgs};
use crate::specfun::{lambert_w_m1, EULER_GAMMA};
use crate::units::RescaledParams;

const PI3: f64 = PI * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    pub rho_floor: f64,
    /// Gap kept below 1/L0.
    pub margin: f64,
    /// Distance to either end of the radius box that counts as a boundary hit.
    pub boundary_tol: f64,
    /// δ̄ and |κ̄| above this produce a warning.
    pub smallness_guard: f64,
    pub grad_tol: f64,
    /// Loose settings used for every start.
    pub explore: NmOptions,
    /// Tight settings for polishing the best starts.
    pub nm: NmOptions,
    /// Starts carried into the polishing phase.
    pub polish: usize,
    pub quadrature: QuadratureSpec,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            rho_floor: 1e-6,
            margin: 1e-6,
            boundary_tol: 1e-4,
            smallness_guard: 0.5,
            grad_tol: 1e-5,
            explore: NmOptions {
                max_evals: 300,
                xtol: 1e-4,
                ftol_abs: 1e-13,
                ftol_rel: 1e-9,
                restarts: 0,
            },
            nm: NmOptions::default(),
            polish: 2,
            quadrature: QuadratureSpec {
                abs_tol: 1e-12,
                rel_tol: 1e-12,
                ..QuadratureSpec::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFlag {
    Interior,
    /// Radius at the floor: collapse.
    Floor,
    /// Radius at 1/L0: bursting.
    Ceiling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub stack: SkyrmionStack,
    pub energy: f64,
    pub converged: bool,
    pub iterations: usize,
    pub boundary_flags: Vec<BoundaryFlag>,
    pub gradient_norm: f64,
    pub warnings: Vec<String>,
}

impl MinimizeResult {
    pub fn any_boundary(&self) -> bool {
        self.boundary_flags.iter().any(|f| *f != BoundaryFlag::Interior)
    }
}

/// θ convention: layers alternate between the upper and lower half-plane,
/// starting with θ₁ ∈ [0, π].
pub fn theta_from_cos(c: f64, layer: usize) -> f64 {
    let t = c.clamp(-1.0, 1.0).acos();
    normalize_angle(if layer % 2 == 0 { t } else { -t })
}

/// Reduced energy at fixed radii and centers, minimised over all angles.
/// Returns (energy, cos θ per layer). Zeeman is ignored.
pub fn energy_min_over_angles(
    rhos: &[f64],
    centers: &[[f64; 2]],
    p: &RescaledParams,
    q: &QuadratureSpec,
) -> Result<(f64, Vec<f64>)> {
    let n = rhos.len();
    let db = p.delta_bar;
    let mut konst = 0.0;
    let mut h = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        let r = rhos[i];
        konst += reduced_local(r) - PI3 / 8.0 * db * r;
        h[i][i] = 2.0 * 3.0 * PI3 / 8.0 * db * r;
        b[i] = -8.0 * PI * p.kappa_bar * r;
    }
    if db != 0.0 {
        for i in 0..n {
            for k in i + 1..n {
                let beta = (rhos[i] * rhos[k]).sqrt();
                let d = (centers[i][0] - centers[k][0]).hypot(centers[i][1] - centers[k][1]);
                let f = shape_values(
                    ShapeArgs {
                        alpha: (rhos[k] / rhos[i]).sqrt(),
                        lambda: d / beta,
                    },
                    q,
                )?;
                konst -= PI3 / 4.0 * db * beta * f.ss;
                let hv = 3.0 * PI3 / 4.0 * db * beta * f.vv;
                h[i][k] = hv;
                h[k][i] = hv;
                b[i] -= 4.0 * PI * db * beta * f.vs;
                b[k] += 4.0 * PI * db * beta * f.vs_inv;
            }
        }
    }
    let (c, v) = minimize_box_qp(&h, &b);
    Ok((konst + v, c))
}

fn stack_from(rhos: &[f64], cs: &[f64], centers: &[[f64; 2]]) -> SkyrmionStack {
    SkyrmionStack::new(
        rhos.iter()
            .zip(cs)
            .zip(centers)
            .enumerate()
            .map(|(i, ((&r, &c), &x))| SkyrmionLayerParams::reduced(r, theta_from_cos(c, i), x))
            .collect(),
    )
}

fn regime_warnings(p: &RescaledParams, guard: f64) -> Vec<String> {
    let mut w = Vec::new();
    if p.delta_bar > guard {
        w.push(format!(
            "delta_bar = {} exceeds the smallness guard {guard}",
            p.delta_bar
        ));
    }
    if p.kappa_bar.abs() > guard {
        w.push(format!(
            "|kappa_bar| = {} exceeds the smallness guard {guard}",
            p.kappa_bar.abs()
        ));
    }
    if p.h_bar != 0.0 {
        w.push("h_bar is ignored by the minimiser (Zeeman term dropped)".into());
    }
    w
}

fn flags_for(rhos: &[f64], lo: f64, hi: f64, tol: f64) -> Vec<BoundaryFlag> {
    rhos.iter()
        .map(|&r| {
            if r - lo < tol {
                BoundaryFlag::Floor
            } else if hi - r < tol {
                BoundaryFlag::Ceiling
            } else {
                BoundaryFlag::Interior
            }
        })
        .collect()
}

/// Minimise over radii and angles with the centers held fixed.
pub fn minimize_fixed_positions(centers: &[[f64; 2]], p: &RescaledParams) -> Result<MinimizeResult> {
    minimize_fixed_positions_with(centers, p, &MinimizeOptions::default())
}

pub fn minimize_fixed_positions_with(
    centers: &[[f64; 2]],
    p: &RescaledParams,
    o: &MinimizeOptions,
) -> Result<MinimizeResult> {
    p.validate()?;
    if centers.is_empty() {
        return Err(Error::invalid("centers", "at least one layer is required"));
    }
    if !(o.rho_floor > 0.0) || o.rho_floor >= p.rho_max() - o.margin {
        return Err(Error::InvalidConfig(
            "rho_floor must lie inside (0, 1/L0 - margin)".into(),
        ));
    }
    let n = centers.len();
    let pp = RescaledParams { h_bar: 0.0, ..*p };
    let lo = o.rho_floor.ln();
    let hi_rho = p.rho_max() - o.margin;
    let hi = hi_rho.ln();
    let lower = vec![lo; n];
    let upper = vec![hi; n];

    let fracs = [0.01, 0.03, 0.1, 0.3, 0.7];
    let mut starts: Vec<Vec<f64>> = fracs.iter().map(|f| vec![f * p.rho_max(); n]).collect();
    for (a, b) in [(0.03, 0.3), (0.3, 0.03), (0.1, 0.7)] {
        starts.push((0..n).map(|i| if i % 2 == 0 { a } else { b } * p.rho_max()).collect());
    }

    let coarse_q = QuadratureSpec {
        abs_tol: o.quadrature.abs_tol.max(1e-10),
        ..o.quadrature
    };
    let objective = |q: QuadratureSpec| {
        move |y: &[f64]| -> f64 {
            let rhos: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            energy_min_over_angles(&rhos, centers, &pp, &q)
                .map(|v| v.0)
                .unwrap_or(f64::INFINITY)
        }
    };
    let bounds = || Bounds {
        lower: &lower,
        upper: &upper,
    };

    let mut explored = Vec::new();
    let mut diagnostics = Vec::new();
    let mut iterations = 0;
    for s in &starts {
        let y0: Vec<f64> = s.iter().map(|r| r.ln()).collect();
        let r = nelder_mead(objective(coarse_q), &y0, &vec![0.5; n], Some(bounds()), o.explore);
        iterations += r.iterations;
        diagnostics.push(format!("start {:?}: f = {:e}, evals = {}", s, r.f, r.evals));
        if r.f.is_finite() {
            explored.push(r);
        }
    }
    if explored.is_empty() {
        return Err(Error::NonConvergence(format!(
            "no start produced a finite energy: {}",
            diagnostics.join("; ")
        )));
    }
    explored.sort_by(|a, b| a.f.total_cmp(&b.f));
    let mut best: Option<NmResult> = None;
    for e in explored.iter().take(o.polish.max(1)) {
        let r = nelder_mead(objective(o.quadrature), &e.x, &vec![0.1; n], Some(bounds()), o.nm);
        iterations += r.iterations;
        if r.f.is_finite() && best.as_ref().map_or(true, |b| r.f < b.f) {
            best = Some(r);
        }
    }
    let Some(best) = best else {
        return Err(Error::NonConvergence(format!(
            "polishing produced no finite energy: {}",
            diagnostics.join("; ")
        )));
    };

    let rhos: Vec<f64> = best.x.iter().map(|v| v.exp()).collect();
    let (energy, cs) = energy_min_over_angles(&rhos, centers, &pp, &o.quadrature)?;
    let stack = stack_from(&rhos, &cs, centers);
    let boundary_flags = flags_for(&rhos, o.rho_floor, hi_rho, o.boundary_tol);
    let interior = boundary_flags.iter().all(|f| *f == BoundaryFlag::Interior);

    let mut warnings = regime_warnings(p, o.smallness_guard);
    let gradient_norm = if interior {
        let g = energy_gradient_fd(&stack, &pp, 1e-6)?;
        warnings.extend(g.warnings.iter().cloned());
        g.d_rho
            .iter()
            .zip(&rhos)
            .map(|(d, r)| (d * r).abs())
            .chain(g.d_theta.iter().map(|d| d.abs()))
            .fold(0.0f64, f64::max)
    } else {
        f64::NAN
    };
    let converged = best.converged && interior && gradient_norm < o.grad_tol;
    if !interior {
        warnings.push(format!("radius reached the box boundary: {boundary_flags:?}"));
    }
    Ok(MinimizeResult {
        stack,
        energy,
        converged,
        iterations,
        boundary_flags,
        gradient_norm,
        warnings,
    })
}

/// Critical δ̄ above which the bilayer radius formula has no real solution.
pub fn delta_bar_critical() -> f64 {
    128.0 / ((16.0 + PI * PI) * (2.0 + EULER_GAMMA).exp())
}

/// Closed-form bilayer radius via the lower Lambert branch.
pub fn bilayer_rho_star(delta_bar: f64) -> Result<f64> {
    if !(delta_bar > 0.0) || !delta_bar.is_finite() {
        return Err(Error::invalid("delta_bar", "must be positive"));
    }
    let c = 16.0 + PI * PI;
    let arg = -(c / 128.0) * (1.0 + EULER_GAMMA).exp() * delta_bar;
    if arg < -(-1.0f64).exp() {
        return Err(Error::UnsupportedRegime(format!(
            "delta_bar = {delta_bar} exceeds the critical value {:.6} of the radius formula",
            delta_bar_critical()
        )));
    }
    let w = lambert_w_m1(arg)?;
    Ok(c * delta_bar / (-64.0 * w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilayerGlobal {
    pub rho_star: f64,
    /// 2F(ρ*).
    pub energy: f64,
    pub analytic: MinimizeResult,
    pub numeric: MinimizeResult,
    /// Center separation of the numeric minimiser.
    pub numeric_separation: f64,
    pub agreement: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BilayerOptions {
    pub delta_bar_guard: f64,
    pub nm: NmOptions,
    pub quadrature: QuadratureSpec,
}

impl Default for BilayerOptions {
    fn default() -> Self {
        BilayerOptions {
            delta_bar_guard: 0.5,
            nm: NmOptions {
                max_evals: 6000,
                xtol: 1e-9,
                ftol_abs: 1e-15,
                ftol_rel: 1e-13,
                restarts: 4,
            },
            quadrature: QuadratureSpec {
                abs_tol: 1e-12,
                rel_tol: 1e-12,
                ..QuadratureSpec::default()
            },
        }
    }
}

/// Global bilayer minimiser: closed form, confirmed by an unconstrained
/// minimisation over (ρ₁, θ₁, ρ₂, θ₂, r).
pub fn bilayer_global(p: &RescaledParams) -> Result<BilayerGlobal> {
    bilayer_global_with(p, &BilayerOptions::default())
}

pub fn bilayer_global_with(p: &RescaledParams, o: &BilayerOptions) -> Result<BilayerGlobal> {
    p.validate()?;
    if p.kappa_bar != 0.0 || p.h_bar != 0.0 {
        return Err(Error::invalid(
            "kappa_bar/h_bar",
            "the bilayer minimiser requires kappa_bar = h_bar = 0",
        ));
    }
    let mut warnings = Vec::new();
    if p.delta_bar >= o.delta_bar_guard {
        warnings.push(format!(
            "delta_bar = {} is at or above the guard {}",
            p.delta_bar, o.delta_bar_guard
        ));
    }
    let rho_star = bilayer_rho_star(p.delta_bar)?;
    if rho_star >= p.rho_max() {
        return Err(Error::Admissibility {
            layer: 0,
            rho: rho_star,
            rho_max: p.rho_max(),
        });
    }
    let energy = 2.0 * bilayer_f_unchecked(rho_star, p.delta_bar);
    let analytic_stack = SkyrmionStack::new(vec![
        SkyrmionLayerParams::reduced(rho_star, 0.0, [0.0, 0.0]),
        SkyrmionLayerParams::reduced(rho_star, -PI, [0.0, 0.0]),
    ]);
    let g = energy_gradient_fd(&analytic_stack, p, 1e-6)?;
    let analytic = MinimizeResult {
        stack: analytic_stack,
        energy,
        converged: true,
        iterations: 0,
        boundary_flags: vec![BoundaryFlag::Interior; 2],
        gradient_norm: g.max_abs(),
        warnings: Vec::new(),
    };

    let (numeric, sep) = bilayer_numeric(p, rho_star, o)?;
    let t1 = numeric.stack.layers[0].theta;
    let t2 = numeric.stack.layers[1].theta;
    let ang_ok = normalize_angle(t1).abs() < 1e-3 && (PI - normalize_angle(t2).abs()) < 1e-3;
    let rho_ok = numeric.stack.layers.iter().all(|l| (l.rho - rho_star).abs() < 1e-5);
    let agreement = ang_ok && rho_ok && sep < 1e-3 && (numeric.energy - energy).abs() < 1e-5;
    if !agreement {
        warnings.push(format!(
            "numeric minimiser differs from the closed form: rho = ({}, {}), theta = ({t1}, {t2}), r = {sep}, energy = {}",
            numeric.stack.layers[0].rho, numeric.stack.layers[1].rho, numeric.energy
        ));
    }
    Ok(BilayerGlobal {
        rho_star,
        energy,
        analytic,
        numeric,
        numeric_separation: sep,
        agreement,
        warnings,
    })
}

fn bilayer_numeric(p: &RescaledParams, rho_star: f64, o: &BilayerOptions) -> Result<(MinimizeResult, f64)> {
    let lo = 1e-6f64.ln();
    let hi = (p.rho_max() - 1e-6).ln();
    let lower = [lo, -4.0 * PI, lo, -4.0 * PI, -1.0, -1.0];
    let upper = [hi, 4.0 * PI, hi, 4.0 * PI, 1.0, 1.0];
    let objective = |v: &[f64]| -> f64 {
        let s = SkyrmionStack::new(vec![
            SkyrmionLayerParams {
                rho: v[0].exp(),
                theta: v[1],
                l: None,
                center: [0.0, 0.0],
            },
            SkyrmionLayerParams {
                rho: v[2].exp(),
                theta: v[3],
                l: None,
                center: [v[4], v[5]],
            },
        ]);
        energy_reduced_with(&s, p, &o.quadrature)
            .map(|e| e.total)
            .unwrap_or(f64::INFINITY)
    };
    // starts are deliberately away from the closed-form point
    let scale = rho_star.max(1e-4);
    let starts = [
        [0.5 * scale, 0.6, 1.5 * scale, -2.4, 0.3 * scale, -0.2 * scale],
        [1.4 * scale, -0.5, 0.7 * scale, 2.6, -0.4 * scale, 0.5 * scale],
        [scale, 1.0, scale, -1.0, 0.2 * scale, 0.2 * scale],
    ];
    let mut best: Option<NmResult> = None;
    let mut iterations = 0;
    for s in starts {
        let x0 = [s[0].ln(), s[1], s[2].ln(), s[3], s[4], s[5]];
        let step = [0.3, 0.4, 0.3, 0.4, 0.5 * scale, 0.5 * scale];
        let r = nelder_mead(
            objective,
            &x0,
            &step,
            Some(Bounds {
                lower: &lower,
                upper: &upper,
            }),
            o.nm,
        );
        iterations += r.iterations;
        if r.f.is_finite() && best.as_ref().map_or(true, |b| r.f < b.f) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| Error::NonConvergence("bilayer minimisation produced no finite energy".into()))?;
    let v = &best.x;
    let stack = SkyrmionStack::new(vec![
        SkyrmionLayerParams::reduced(v[0].exp(), v[1], [0.0, 0.0]),
        SkyrmionLayerParams::reduced(v[2].exp(), v[3], [v[4], v[5]]),
    ]);
    let sep = v[4].hypot(v[5]);
    let rhos = [stack.layers[0].rho, stack.layers[1].rho];
    let boundary_flags = flags_for(&rhos, 1e-6, p.rho_max() - 1e-6, 1e-4);
    let interior = boundary_flags.iter().all(|f| *f == BoundaryFlag::Interior);
    Ok((
        MinimizeResult {
            stack,
            energy: best.f,
            converged: best.converged && interior,
            iterations,
            boundary_flags,
            gradient_norm: f64::NAN,
            warnings: Vec::new(),
        },
        sep,
    ))
}
