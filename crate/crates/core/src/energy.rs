//! Reduced stack energy F_N, its per-term breakdown and the bilayer
//! specialisations. All energies exclude the 8πN topological bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boxqp::minimize_box_qp;
use crate::error::{Error, Result};
use crate::shapefun::{f_ss_alpha1, f_vs_alpha1, f_vv_alpha1, shape_values, QuadratureSpec, ShapeArgs};
use crate::specfun::EULER_GAMMA;
use crate::units::RescaledParams;

const PI3: f64 = PI * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkyrmionLayerParams {
    pub rho: f64,
    pub theta: f64,
    /// Truncation parameter; absent in the reduced form.
    #[serde(rename = "L", alias = "l", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default)]
    pub center: [f64; 2],
}

impl SkyrmionLayerParams {
    pub fn reduced(rho: f64, theta: f64, center: [f64; 2]) -> Self {
        SkyrmionLayerParams {
            rho,
            theta: normalize_angle(theta),
            l: None,
            center,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkyrmionStack {
    /// Bottom to top.
    pub layers: Vec<SkyrmionLayerParams>,
}

impl SkyrmionStack {
    pub fn new(layers: Vec<SkyrmionLayerParams>) -> Self {
        SkyrmionStack { layers }
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Copy with every truncation parameter removed.
    pub fn without_l(&self) -> Self {
        let mut s = self.clone();
        for l in &mut s.layers {
            l.l = None;
        }
        s
    }

    /// Copy with L_n = 1/ρ_n.
    pub fn with_optimal_l(&self) -> Self {
        let mut s = self.clone();
        for l in &mut s.layers {
            l.l = Some(1.0 / l.rho);
        }
        s
    }
}

/// Map an angle to [-π, π).
pub fn normalize_angle(theta: f64) -> f64 {
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerTerms {
    pub exchange_excess: f64,
    pub anisotropy: f64,
    pub zeeman: f64,
    pub dmi: f64,
    pub self_vv: f64,
    pub self_ss: f64,
}

impl LayerTerms {
    pub fn sum(&self) -> f64 {
        self.exchange_excess + self.anisotropy + self.zeeman + self.dmi + self.self_vv + self.self_ss
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTerms {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub vv: f64,
    pub ss: f64,
    pub vs: f64,
}

impl PairTerms {
    pub fn sum(&self) -> f64 {
        self.vv + self.ss + self.vs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub layers: Vec<LayerTerms>,
    pub pairs: Vec<PairTerms>,
    pub total: f64,
}

impl EnergyBreakdown {
    fn assemble(layers: Vec<LayerTerms>, pairs: Vec<PairTerms>) -> Self {
        let total = layers.iter().map(LayerTerms::sum).sum::<f64>() + pairs.iter().map(PairTerms::sum).sum::<f64>();
        EnergyBreakdown { layers, pairs, total }
    }

    /// Sum of the stray-field contributions (self and pair).
    pub fn stray_field(&self) -> f64 {
        self.layers.iter().map(|l| l.self_vv + l.self_ss).sum::<f64>()
            + self.pairs.iter().map(PairTerms::sum).sum::<f64>()
    }
}

fn validate_common(s: &SkyrmionStack, p: &RescaledParams) -> Result<()> {
    p.validate()?;
    if s.is_empty() {
        return Err(Error::invalid("layers", "at least one layer is required"));
    }
    for (i, l) in s.layers.iter().enumerate() {
        if !(l.rho > 0.0) || !l.rho.is_finite() {
            return Err(Error::invalid(
                format!("layers[{i}].rho"),
                "must be positive and finite",
            ));
        }
        if !l.theta.is_finite() {
            return Err(Error::invalid(format!("layers[{i}].theta"), "must be finite"));
        }
        if !l.center.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid(format!("layers[{i}].center"), "must be finite"));
        }
    }
    Ok(())
}

fn layer_terms(rho: f64, theta: f64, l: f64, p: &RescaledParams) -> LayerTerms {
    let g = EULER_GAMMA;
    let ln4l2 = (4.0 * l * l).ln();
    let c = theta.cos();
    LayerTerms {
        exchange_excess: 4.0 * PI / (l * l),
        anisotropy: 4.0 * PI * rho * rho * (ln4l2 - 2.0 * (1.0 + g)),
        zeeman: -4.0 * PI * p.h_bar * rho * rho * (ln4l2 - (1.0 + 2.0 * g)),
        dmi: -8.0 * PI * p.kappa_bar * rho * c,
        self_vv: 3.0 * PI3 / 8.0 * p.delta_bar * rho * c * c,
        self_ss: -PI3 / 8.0 * p.delta_bar * rho,
    }
}

/// Scaled separation λ and radius-ratio root α of layers n and k.
pub fn pair_args(a: &SkyrmionLayerParams, b: &SkyrmionLayerParams) -> ShapeArgs {
    let beta = (a.rho * b.rho).sqrt();
    let d = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
    ShapeArgs {
        alpha: (b.rho / a.rho).sqrt(),
        lambda: d / beta,
    }
}

fn pair_terms(
    n: usize,
    k: usize,
    a: &SkyrmionLayerParams,
    b: &SkyrmionLayerParams,
    p: &RescaledParams,
    q: &QuadratureSpec,
) -> Result<PairTerms> {
    let args = pair_args(a, b);
    let beta = (a.rho * b.rho).sqrt();
    let db = p.delta_bar * beta;
    let (cn, ck) = (a.theta.cos(), b.theta.cos());
    if p.delta_bar == 0.0 {
        return Ok(PairTerms {
            n,
            k,
            alpha: args.alpha,
            lambda: args.lambda,
            vv: 0.0,
            ss: 0.0,
            vs: 0.0,
        });
    }
    let f = shape_values(args, q)?;
    Ok(PairTerms {
        n,
        k,
        alpha: args.alpha,
        lambda: args.lambda,
        vv: 3.0 * PI3 / 4.0 * db * cn * ck * f.vv,
        ss: -PI3 / 4.0 * db * f.ss,
        vs: -4.0 * PI * db * (cn * f.vs - ck * f.vs_inv),
    })
}

fn evaluate(s: &SkyrmionStack, ls: &[f64], p: &RescaledParams, q: &QuadratureSpec) -> Result<EnergyBreakdown> {
    let layers = s
        .layers
        .iter()
        .zip(ls)
        .map(|(l, &big_l)| layer_terms(l.rho, l.theta, big_l, p))
        .collect();
    let mut pairs = Vec::new();
    for n in 0..s.len() {
        for k in n + 1..s.len() {
            pairs.push(pair_terms(n, k, &s.layers[n], &s.layers[k], p, q)?);
        }
    }
    Ok(EnergyBreakdown::assemble(layers, pairs))
}

/// F_N with explicit truncation parameters.
pub fn energy_full(s: &SkyrmionStack, p: &RescaledParams) -> Result<EnergyBreakdown> {
    energy_full_with(s, p, &QuadratureSpec::default())
}

pub fn energy_full_with(s: &SkyrmionStack, p: &RescaledParams, q: &QuadratureSpec) -> Result<EnergyBreakdown> {
    validate_common(s, p)?;
    let mut ls = Vec::with_capacity(s.len());
    for (i, l) in s.layers.iter().enumerate() {
        match l.l {
            Some(big_l) if big_l.is_finite() && big_l >= p.l0 => ls.push(big_l),
            Some(big_l) => {
                return Err(Error::invalid(
                    format!("layers[{i}].L"),
                    format!("must be finite and at least L0 = {} (got {big_l})", p.l0),
                ))
            }
            None => return Err(Error::invalid(format!("layers[{i}].L"), "required by the full energy")),
        }
    }
    evaluate(s, &ls, p, q)
}

/// F_N after the partial minimisation L_n = 1/ρ_n.
pub fn energy_reduced(s: &SkyrmionStack, p: &RescaledParams) -> Result<EnergyBreakdown> {
    energy_reduced_with(s, p, &QuadratureSpec::default())
}

pub fn energy_reduced_with(s: &SkyrmionStack, p: &RescaledParams, q: &QuadratureSpec) -> Result<EnergyBreakdown> {
    validate_common(s, p)?;
    check_admissible(s.layers.iter().map(|l| l.rho), p)?;
    let ls: Vec<f64> = s.layers.iter().map(|l| 1.0 / l.rho).collect();
    evaluate(s, &ls, p, q)
}

fn check_admissible(rhos: impl Iterator<Item = f64>, p: &RescaledParams) -> Result<()> {
    for (layer, rho) in rhos.enumerate() {
        if !(rho > 0.0 && rho < p.rho_max()) {
            return Err(Error::Admissibility {
                layer,
                rho,
                rho_max: p.rho_max(),
            });
        }
    }
    Ok(())
}

/// −4πρ² ln(e^{1+2γ}ρ²/4): exchange plus anisotropy at L = 1/ρ.
pub fn reduced_local(rho: f64) -> f64 {
    -4.0 * PI * rho * rho * ((1.0 + 2.0 * EULER_GAMMA).exp() * rho * rho / 4.0).ln()
}

fn require_bilayer_regime(p: &RescaledParams) -> Result<()> {
    p.validate()?;
    if p.kappa_bar != 0.0 {
        return Err(Error::invalid(
            "kappa_bar",
            "the bilayer functions require kappa_bar = 0",
        ));
    }
    if p.h_bar != 0.0 {
        return Err(Error::invalid("h_bar", "the bilayer functions require h_bar = 0"));
    }
    Ok(())
}

/// Energy per layer of the coincident antiparallel Néel pair.
pub fn bilayer_f(rho: f64, p: &RescaledParams) -> Result<f64> {
    require_bilayer_regime(p)?;
    check_admissible(std::iter::once(rho), p)?;
    Ok(bilayer_f_unchecked(rho, p.delta_bar))
}

pub(crate) fn bilayer_f_unchecked(rho: f64, delta_bar: f64) -> f64 {
    reduced_local(rho) - delta_bar * PI3 / 4.0 * rho - 4.0 * PI * delta_bar * rho
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F2Sym {
    pub energy: f64,
    pub c1: f64,
    pub c2: f64,
}

impl F2Sym {
    /// Angles with θ₁ ∈ [0, π] and θ₂ ∈ [−π, 0].
    pub fn thetas(&self) -> (f64, f64) {
        (self.c1.clamp(-1.0, 1.0).acos(), -self.c2.clamp(-1.0, 1.0).acos())
    }
}

/// Equal-radius bilayer at separation r, minimised over both angles.
pub fn bilayer_f2sym(rho: f64, r: f64, p: &RescaledParams) -> Result<F2Sym> {
    require_bilayer_regime(p)?;
    check_admissible(std::iter::once(rho), p)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid("r", "must be non-negative and finite"));
    }
    let lambda = r / rho;
    let (fvv, fss, fvs) = (f_vv_alpha1(lambda)?, f_ss_alpha1(lambda)?, f_vs_alpha1(lambda)?);
    Ok(f2sym_from_shapes(rho, p.delta_bar, fvv, fss, fvs))
}

pub(crate) fn f2sym_from_shapes(rho: f64, db: f64, fvv: f64, fss: f64, fvs: f64) -> F2Sym {
    let konst = 2.0 * (reduced_local(rho) - db * PI3 * rho / 8.0) - PI3 / 4.0 * db * rho * fss;
    let a = 3.0 * PI3 / 8.0 * db * rho;
    let b = 3.0 * PI3 / 4.0 * db * rho * fvv;
    let d = -4.0 * PI * db * rho * fvs;
    let h = vec![vec![2.0 * a, b], vec![b, 2.0 * a]];
    let (c, v) = minimize_box_qp(&h, &[d, -d]);
    F2Sym {
        energy: konst + v,
        c1: c[0],
        c2: c[1],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub d_rho: Vec<f64>,
    pub d_theta: Vec<f64>,
    pub d_center: Vec<[f64; 2]>,
    pub warnings: Vec<String>,
}

impl Gradient {
    pub fn max_abs(&self) -> f64 {
        self.d_rho
            .iter()
            .chain(&self.d_theta)
            .chain(self.d_center.iter().flatten())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Central-difference gradient of the energy (full form when every layer
/// carries L, reduced form otherwise). `step` is relative.
pub fn energy_gradient_fd(s: &SkyrmionStack, p: &RescaledParams, step: f64) -> Result<Gradient> {
    let q = QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-13,
        ..QuadratureSpec::default()
    };
    energy_gradient_fd_with(s, p, step, &q)
}

pub fn energy_gradient_fd_with(
    s: &SkyrmionStack,
    p: &RescaledParams,
    step: f64,
    q: &QuadratureSpec,
) -> Result<Gradient> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid("step", "must be positive"));
    }
    let mut warnings = Vec::new();
    if step < 1e-9 {
        warnings.push(format!(
            "step {step:e} is below 1e-9; rounding error in the energy may dominate the difference quotient"
        ));
    }
    let full = s.layers.iter().all(|l| l.l.is_some());
    let eval = |st: &SkyrmionStack| -> Result<f64> {
        if full {
            energy_full_with(st, p, q).map(|e| e.total)
        } else {
            energy_reduced_with(st, p, q).map(|e| e.total)
        }
    };
    let scale = s.layers.iter().map(|l| l.rho).sum::<f64>() / s.len().max(1) as f64;
    let n = s.len();
    let mut g = Gradient {
        d_rho: vec![0.0; n],
        d_theta: vec![0.0; n],
        d_center: vec![[0.0; 2]; n],
        warnings,
    };
    let diff = |set: &dyn Fn(&mut SkyrmionStack, f64), h: f64| -> Result<f64> {
        let mut plus = s.clone();
        let mut minus = s.clone();
        set(&mut plus, h);
        set(&mut minus, -h);
        Ok((eval(&plus)? - eval(&minus)?) / (2.0 * h))
    };
    for i in 0..n {
        let h = step * s.layers[i].rho;
        g.d_rho[i] = diff(&|st, d| st.layers[i].rho += d, h)?;
        g.d_theta[i] = diff(&|st, d| st.layers[i].theta += d, step)?;
        for j in 0..2 {
            let h = step * s.layers[i].center[j].abs().max(scale);
            g.d_center[i][j] = diff(&|st, d| st.layers[i].center[j] += d, h)?;
        }
    }
    Ok(g)
}
