//! Command-line front end: configuration loading, dispatch and output.
//!
//! Precedence is flag, then the `params` record of `--config`, then the
//! built-in default.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bp_oracle::{
    fourier_tail_check, local_energies_radial, profile_value, radial_expansion, topological_degree, BPProfile,
    FourierRow,
};
use crate::energy::{energy_full_with, energy_reduced_with, EnergyBreakdown, SkyrmionStack};
use crate::error::{Error, Result};
use crate::kernels::{kernel_asymptotic, kernel_exact, kernel_oracle, KernelKind};
use crate::optimize::{
    asymmetric_check, bilayer_global_with, bilayer_rho_star, delta_bar_critical, landscape_grid,
    minimize_fixed_positions_with, separation_scan_with, BilayerOptions, MinimizeOptions, ScanOptions,
};
use crate::output::{render_document, render_table, round_sig, write_atomic, Cell, Format, Provenance, Schema};
use crate::shapefun::{shape_quadrature, shape_values, QuadratureSpec, ShapeArgs};
use crate::specfun::{eval, SpecialFunctionId};
use crate::units::{derive_dimensionless, physical_length, rescale, MaterialParams, RescaledParams, DEFAULT_L0};

#[derive(Debug, Parser)]
#[command(name = "skystack", version, about = "Compact skyrmions in magnetic multilayers")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output if omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Significant digits in numeric output; shortest round trip if omitted.
    #[arg(long, global = true)]
    pub precision: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    Format::parse(s).ok_or_else(|| format!("unknown format '{s}', expected csv or json"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimensionless and rescaled parameters from material constants.
    Nondim(NondimFlags),
    /// Table of a special function.
    Specfun(SpecfunFlags),
    /// Stray-field kernels with their oracle and asymptotic forms.
    Kernels(KernelsFlags),
    /// Shape functions on an (alpha, lambda) grid.
    Shapefun(ShapefunFlags),
    /// Energy breakdown of a stack.
    Energy(EnergyFlags),
    /// Minimise over radii and angles at fixed centers.
    Minimize(MinimizeFlags),
    /// Global bilayer minimiser.
    Bilayer(BilayerFlags),
    /// Symmetric bilayer energy against center separation.
    Scan(ScanFlags),
    /// Bilayer energy on a (rho, r) grid.
    Landscape(LandscapeFlags),
    /// Expansion checks against the truncated BP profile.
    Oracle(OracleFlags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Nondim(_) => "nondim",
            Command::Specfun(_) => "specfun",
            Command::Kernels(_) => "kernels",
            Command::Shapefun(_) => "shapefun",
            Command::Energy(_) => "energy",
            Command::Minimize(_) => "minimize",
            Command::Bilayer(_) => "bilayer",
            Command::Scan(_) => "scan",
            Command::Landscape(_) => "landscape",
            Command::Oracle(_) => "oracle",
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub params: Value,
    pub output: OutputSpec,
    pub seed: Option<u64>,
    pub precision: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Result of one invocation: the rendered text and where it went.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub path: Option<PathBuf>,
}

macro_rules! set {
    ($p:expr, $f:expr, $($field:ident),+) => {
        $( if let Some(v) = $f.$field.clone() { $p.$field = v; } )+
    };
}

// model parameters shared by several commands
fn model(delta_bar: f64, kappa_bar: f64, h_bar: f64, l0: f64) -> Result<RescaledParams> {
    RescaledParams::new(delta_bar, kappa_bar, h_bar, l0)
}

fn gdco() -> MaterialParams {
    MaterialParams {
        exchange_stiffness: 20e-12,
        saturation_magnetization: 1e5,
        bulk_anisotropy: 6.7e3,
        surface_anisotropy_top: 0.0,
        surface_anisotropy_bottom: 0.0,
        dmi_top: 0.0,
        dmi_bottom: 0.0,
        layer_thickness: 5e-9,
        spacer_ratio: 1.0 + f64::EPSILON,
        layer_count: 2,
        applied_field: 0.0,
    }
}

// ---- nondim ----

#[derive(Debug, Clone, Args)]
pub struct NondimFlags {
    /// Named material: gdco.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub exchange_stiffness: Option<f64>,
    #[arg(long)]
    pub saturation_magnetization: Option<f64>,
    #[arg(long)]
    pub bulk_anisotropy: Option<f64>,
    #[arg(long)]
    pub layer_thickness: Option<f64>,
    #[arg(long)]
    pub dmi_top: Option<f64>,
    #[arg(long)]
    pub dmi_bottom: Option<f64>,
    #[arg(long)]
    pub applied_field: Option<f64>,
    #[arg(long = "L0")]
    pub l0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NondimParams {
    pub preset: Option<String>,
    pub material: Option<MaterialParams>,
    #[serde(rename = "L0")]
    pub l0: f64,
}

impl Default for NondimParams {
    fn default() -> Self {
        NondimParams {
            preset: None,
            material: None,
            l0: DEFAULT_L0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct NondimReport {
    material: MaterialParams,
    dimensionless: crate::units::DimensionlessParams,
    rescaled: RescaledParams,
    exchange_length_nm: f64,
    delta_bar_critical: f64,
    bilayer_rho_star: Option<f64>,
    bilayer_radius_nm: Option<f64>,
}

fn nondim(f: &NondimFlags, mut p: NondimParams) -> Result<(Value, NondimReport)> {
    if f.preset.is_some() {
        p.preset = f.preset.clone();
    }
    if let Some(v) = f.l0 {
        p.l0 = v;
    }
    let mut m = match (&p.preset, p.material) {
        (_, Some(m)) => m,
        (Some(name), None) if name.eq_ignore_ascii_case("gdco") => gdco(),
        (Some(name), None) => return Err(Error::invalid("params.preset", format!("unknown preset '{name}'"))),
        (None, None) => {
            let all = [
                f.exchange_stiffness,
                f.saturation_magnetization,
                f.bulk_anisotropy,
                f.layer_thickness,
            ];
            if all.iter().any(|x| x.is_none()) {
                return Err(Error::invalid(
                    "params.material",
                    "give a preset, a material record or all of the exchange stiffness, saturation magnetization, bulk anisotropy and layer thickness",
                ));
            }
            MaterialParams {
                layer_count: 2,
                spacer_ratio: 1.0 + f64::EPSILON,
                ..gdco()
            }
        }
    };
    if let Some(v) = f.exchange_stiffness {
        m.exchange_stiffness = v;
    }
    if let Some(v) = f.saturation_magnetization {
        m.saturation_magnetization = v;
    }
    if let Some(v) = f.bulk_anisotropy {
        m.bulk_anisotropy = v;
    }
    if let Some(v) = f.layer_thickness {
        m.layer_thickness = v;
    }
    if let Some(v) = f.dmi_top {
        m.dmi_top = v;
    }
    if let Some(v) = f.dmi_bottom {
        m.dmi_bottom = v;
    }
    if let Some(v) = f.applied_field {
        m.applied_field = v;
    }
    p.material = Some(m);
    let d = derive_dimensionless(&m)?;
    let r = rescale(&d, p.l0)?;
    let rho = if r.kappa_bar == 0.0 && r.h_bar == 0.0 {
        bilayer_rho_star(r.delta_bar).ok()
    } else {
        None
    };
    let report = NondimReport {
        material: m,
        dimensionless: d,
        rescaled: r,
        exchange_length_nm: d.exchange_length * 1e9,
        delta_bar_critical: delta_bar_critical(),
        bilayer_rho_star: rho,
        bilayer_radius_nm: rho.map(|x| physical_length(x, &d, &r) * 1e9),
    };
    Ok((to_value(&p)?, report))
}

// ---- grids ----

/// `a:b:step` (inclusive), `log:a:b:n`, or a comma-separated list.
pub fn parse_grid(field: &str, s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::invalid(field, format!("'{s}': {why}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let v: Vec<f64> = if let Some(rest) = s.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected log:start:stop:count"));
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad("count must be an integer"))?;
        if !(a > 0.0 && b > 0.0) || n < 1 {
            return Err(bad("log grid needs positive ends and a count of at least 1"));
        }
        if n == 1 {
            vec![a]
        } else {
            (0..n)
                .map(|i| round_sig((a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp(), Some(15)))
                .collect()
        }
    } else if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(bad("step must be positive and stop not below start"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        if n > 10_000_000 {
            return Err(bad("too many points"));
        }
        // 15 digits drop the accumulated representation noise of a + i·h
        (0..=n).map(|i| round_sig(a + h * i as f64, Some(15))).collect()
    } else {
        s.split(',').map(num).collect::<Result<_>>()?
    };
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(bad("empty or non-finite grid"));
    }
    Ok(v)
}

// A domain error on a user-supplied grid point is an input error at that field.
fn at_field(field: &str, i: usize) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Domain { .. } | Error::InvalidInput { .. } => Error::invalid(format!("{field}[{i}]"), e.to_string()),
        other => other,
    }
}

// ---- specfun ----

#[derive(Debug, Clone, Args)]
pub struct SpecfunFlags {
    /// J0, K0, K1, EllipticK, EllipticE, LambertWm1 or Asinh.
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecfunParams {
    pub function: String,
    pub x: String,
}

impl Default for SpecfunParams {
    fn default() -> Self {
        SpecfunParams {
            function: "J0".into(),
            x: "0:10:0.5".into(),
        }
    }
}

const SPECFUN_SCHEMA: Schema = Schema {
    name: "specfun",
    columns: &["function", "x", "value"],
};

fn specfun(f: &SpecfunFlags, mut p: SpecfunParams) -> Result<(Value, Vec<Vec<Cell>>)> {
    set!(p, f, function, x);
    let id = SpecialFunctionId::parse(&p.function)
        .ok_or_else(|| Error::invalid("params.function", format!("unknown function '{}'", p.function)))?;
    let rows = parse_grid("params.x", &p.x)?
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            Ok(vec![
                id.name().into(),
                x.into(),
                eval(id, x).map_err(at_field("params.x", i))?.into(),
            ])
        })
        .collect::<Result<_>>()?;
    Ok((to_value(&p)?, rows))
}

// ---- kernels ----

#[derive(Debug, Clone, Args)]
pub struct KernelsFlags {
    /// vv, vs, ss or all.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub u: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub r: Option<String>,
    /// Skip the slow two-dimensional oracle.
    #[arg(long)]
    pub no_oracle: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelsParams {
    pub kind: String,
    pub u: String,
    pub delta: f64,
    pub r: String,
    pub oracle: bool,
}

impl Default for KernelsParams {
    fn default() -> Self {
        KernelsParams {
            kind: "all".into(),
            u: "-3:3:0.5".into(),
            delta: 1.0,
            r: "0.1,1,10".into(),
            oracle: true,
        }
    }
}

const KERNELS_SCHEMA: Schema = Schema {
    name: "kernels",
    columns: &["kind", "u", "delta", "r", "exact", "oracle", "asymptotic"],
};

fn kernels(f: &KernelsFlags, mut p: KernelsParams) -> Result<(Value, Vec<Vec<Cell>>)> {
    set!(p, f, kind, u, delta, r);
    if f.no_oracle {
        p.oracle = false;
    }
    let kinds: Vec<KernelKind> = if p.kind.eq_ignore_ascii_case("all") {
        vec![KernelKind::VV, KernelKind::VS, KernelKind::SS]
    } else {
        vec![KernelKind::parse(&p.kind)
            .ok_or_else(|| Error::invalid("params.kind", format!("unknown kernel '{}'", p.kind)))?]
    };
    if !(p.delta > 0.0) {
        return Err(Error::invalid("params.delta", "must be positive"));
    }
    let us = parse_grid("params.u", &p.u)?;
    let rs = parse_grid("params.r", &p.r)?;
    if let Some(i) = rs.iter().position(|r| !(*r > 0.0)) {
        return Err(Error::invalid(format!("params.r[{i}]"), "must be positive"));
    }
    let mut rows = Vec::new();
    for &k in &kinds {
        for &r in &rs {
            for &u in &us {
                let exact = kernel_exact(k, u, p.delta, r)?;
                let oracle = if p.oracle {
                    Some(kernel_oracle(k, u, p.delta, r)?)
                } else {
                    None
                };
                let asym = kernel_asymptotic(k, u, p.delta, r).ok();
                rows.push(vec![
                    k.name().into(),
                    u.into(),
                    p.delta.into(),
                    r.into(),
                    exact.into(),
                    oracle.into(),
                    asym.into(),
                ]);
            }
        }
    }
    Ok((to_value(&p)?, rows))
}

// ---- shapefun ----

#[derive(Debug, Clone, Args)]
pub struct ShapefunFlags {
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub lambda: Option<String>,
    /// Always integrate, never use the closed forms.
    #[arg(long)]
    pub quadrature_only: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapefunParams {
    pub alpha: String,
    pub lambda: String,
    pub quadrature_only: bool,
    pub quadrature: QuadratureSpec,
}

impl Default for ShapefunParams {
    fn default() -> Self {
        ShapefunParams {
            alpha: "log:0.1:10:41".into(),
            lambda: "0".into(),
            quadrature_only: false,
            quadrature: QuadratureSpec::default(),
        }
    }
}

pub const SHAPEFUN_SCHEMA: Schema = Schema {
    name: "shapefun",
    columns: &["alpha", "lambda", "f_vv", "f_ss", "f_vs", "err_est"],
};

fn shapefun(f: &ShapefunFlags, mut p: ShapefunParams) -> Result<(Value, Vec<Vec<Cell>>)> {
    set!(p, f, alpha, lambda);
    if f.quadrature_only {
        p.quadrature_only = true;
    }
    p.quadrature.validate()?;
    let alphas = parse_grid("params.alpha", &p.alpha)?;
    let lambdas = parse_grid("params.lambda", &p.lambda)?;
    let mut rows = Vec::new();
    if let Some(i) = alphas.iter().position(|a| !(*a > 0.0)) {
        return Err(Error::invalid(format!("params.alpha[{i}]"), "must be positive"));
    }
    if let Some(i) = lambdas.iter().position(|l| !(*l >= 0.0)) {
        return Err(Error::invalid(format!("params.lambda[{i}]"), "must be non-negative"));
    }
    for &l in &lambdas {
        for &a in &alphas {
            let args = ShapeArgs::new(a, l)?;
            let v = if p.quadrature_only {
                shape_quadrature(args, &p.quadrature)?
            } else {
                shape_values(args, &p.quadrature)?
            };
            rows.push(vec![
                a.into(),
                l.into(),
                v.vv.into(),
                v.ss.into(),
                v.vs.into(),
                v.err_est.into(),
            ]);
        }
    }
    Ok((to_value(&p)?, rows))
}

// ---- energy ----

#[derive(Debug, Clone, Args)]
pub struct EnergyFlags {
    /// JSON file holding a stack record.
    #[arg(long)]
    pub stack: Option<PathBuf>,
    #[arg(long)]
    pub delta_bar: Option<f64>,
    #[arg(long)]
    pub kappa_bar: Option<f64>,
    #[arg(long)]
    pub h_bar: Option<f64>,
    #[arg(long = "L0")]
    pub l0: Option<f64>,
    /// auto, full or reduced.
    #[arg(long)]
    pub form: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    pub stack: Option<SkyrmionStack>,
    pub delta_bar: f64,
    pub kappa_bar: f64,
    pub h_bar: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub form: String,
    pub quadrature: QuadratureSpec,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            stack: None,
            delta_bar: 0.25,
            kappa_bar: 0.0,
            h_bar: 0.0,
            l0: DEFAULT_L0,
            form: "auto".into(),
            quadrature: QuadratureSpec {
                abs_tol: 1e-12,
                rel_tol: 1e-12,
                ..QuadratureSpec::default()
            },
        }
    }
}

const ENERGY_SCHEMA: Schema = Schema {
    name: "energy",
    columns: &["scope", "n", "k", "term", "value"],
};

fn energy(f: &EnergyFlags, mut p: EnergyParams) -> Result<(Value, EnergyBreakdown)> {
    set!(p, f, delta_bar, kappa_bar, h_bar, l0, form);
    if let Some(path) = &f.stack {
        let text = read(path)?;
        p.stack =
            Some(serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?);
    }
    let stack = p
        .stack
        .clone()
        .ok_or_else(|| Error::invalid("params.stack", "a stack is required"))?;
    let m = model(p.delta_bar, p.kappa_bar, p.h_bar, p.l0)?;
    p.quadrature.validate()?;
    let b = match p.form.as_str() {
        "full" => energy_full_with(&stack, &m, &p.quadrature)?,
        "reduced" => energy_reduced_with(&stack.without_l(), &m, &p.quadrature)?,
        "auto" if stack.layers.iter().all(|l| l.l.is_some()) => energy_full_with(&stack, &m, &p.quadrature)?,
        "auto" => energy_reduced_with(&stack, &m, &p.quadrature)?,
        other => return Err(Error::invalid("params.form", format!("unknown form '{other}'"))),
    };
    Ok((to_value(&p)?, b))
}

fn energy_rows(b: &EnergyBreakdown) -> Vec<Vec<Cell>> {
    let mut rows = Vec::new();
    for (n, l) in b.layers.iter().enumerate() {
        for (name, v) in [
            ("exchange_excess", l.exchange_excess),
            ("anisotropy", l.anisotropy),
            ("zeeman", l.zeeman),
            ("dmi", l.dmi),
            ("self_vv", l.self_vv),
            ("self_ss", l.self_ss),
        ] {
            rows.push(vec!["layer".into(), n.into(), Cell::Null, name.into(), v.into()]);
        }
    }
    for pr in &b.pairs {
        for (name, v) in [("vv", pr.vv), ("ss", pr.ss), ("vs", pr.vs)] {
            rows.push(vec!["pair".into(), pr.n.into(), pr.k.into(), name.into(), v.into()]);
        }
    }
    rows.push(vec![
        "total".into(),
        Cell::Null,
        Cell::Null,
        "total".into(),
        b.total.into(),
    ]);
    rows
}

// ---- minimize ----

#[derive(Debug, Clone, Args)]
pub struct MinimizeFlags {
    /// Centers as "x,y;x,y;...".
    #[arg(long)]
    pub centers: Option<String>,
    /// Draw this many centers uniformly in the unit square from --seed.
    #[arg(long)]
    pub random_centers: Option<usize>,
    #[arg(long)]
    pub delta_bar: Option<f64>,
    #[arg(long)]
    pub kappa_bar: Option<f64>,
    #[arg(long)]
    pub h_bar: Option<f64>,
    #[arg(long = "L0")]
    pub l0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeParams {
    pub centers: Option<Vec<[f64; 2]>>,
    pub random_centers: Option<usize>,
    pub delta_bar: f64,
    pub kappa_bar: f64,
    pub h_bar: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub options: MinimizeOptions,
}

impl Default for MinimizeParams {
    fn default() -> Self {
        MinimizeParams {
            centers: None,
            random_centers: None,
            delta_bar: 0.25,
            kappa_bar: 0.0,
            h_bar: 0.0,
            l0: DEFAULT_L0,
            options: MinimizeOptions::default(),
        }
    }
}

const MINIMIZE_SCHEMA: Schema = Schema {
    name: "minimize",
    columns: &[
        "layer",
        "x",
        "y",
        "rho",
        "theta",
        "boundary_flag",
        "energy",
        "converged",
    ],
};

/// Centers drawn uniformly in the unit square.
pub fn random_centers(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect()
}

fn parse_centers(s: &str) -> Result<Vec<[f64; 2]>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let v = parse_grid("params.centers", t)?;
            match v[..] {
                [x, y] => Ok([x, y]),
                _ => Err(Error::invalid("params.centers", format!("'{t}' is not an x,y pair"))),
            }
        })
        .collect()
}

fn minimize(f: &MinimizeFlags, mut p: MinimizeParams, seed: u64) -> Result<(Value, crate::optimize::MinimizeResult)> {
    set!(p, f, delta_bar, kappa_bar, h_bar, l0);
    if let Some(s) = &f.centers {
        p.centers = Some(parse_centers(s)?);
        p.random_centers = None;
    }
    if f.random_centers.is_some() {
        p.random_centers = f.random_centers;
        p.centers = None;
    }
    let centers = match (&p.centers, p.random_centers) {
        (Some(c), _) => c.clone(),
        (None, Some(n)) => random_centers(n, seed),
        (None, None) => return Err(Error::invalid("params.centers", "give centers or random_centers")),
    };
    let m = model(p.delta_bar, p.kappa_bar, p.h_bar, p.l0)?;
    let res = minimize_fixed_positions_with(&centers, &m, &p.options)?;
    let mut echo = to_value(&p)?;
    echo["seed"] = Value::from(seed);
    Ok((echo, res))
}

// ---- bilayer ----

#[derive(Debug, Clone, Args)]
pub struct BilayerFlags {
    #[arg(long)]
    pub delta_bar: Option<f64>,
    #[arg(long = "L0")]
    pub l0: Option<f64>,
    /// Closed form only, skip the numerical confirmation.
    #[arg(long)]
    pub analytic_only: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilayerParams {
    pub delta_bar: f64,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub analytic_only: bool,
    pub options: BilayerOptions,
}

impl Default for BilayerParams {
    fn default() -> Self {
        BilayerParams {
            delta_bar: 0.25,
            l0: DEFAULT_L0,
            analytic_only: false,
            options: BilayerOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct BilayerReport {
    delta_bar: f64,
    rho: f64,
    energy: f64,
    numeric_energy: Option<f64>,
    numeric_separation: Option<f64>,
    agreement: Option<bool>,
    detail: Option<crate::optimize::BilayerGlobal>,
}

const BILAYER_SCHEMA: Schema = Schema {
    name: "bilayer",
    columns: &[
        "delta_bar",
        "rho",
        "energy",
        "numeric_energy",
        "numeric_separation",
        "agreement",
    ],
};

fn bilayer(f: &BilayerFlags, mut p: BilayerParams) -> Result<(Value, BilayerReport)> {
    set!(p, f, delta_bar, l0);
    if f.analytic_only {
        p.analytic_only = true;
    }
    let m = model(p.delta_bar, 0.0, 0.0, p.l0)?;
    let report = if p.analytic_only {
        let rho = bilayer_rho_star(p.delta_bar)?;
        BilayerReport {
            delta_bar: p.delta_bar,
            rho,
            energy: 2.0 * crate::energy::bilayer_f(rho, &m)?,
            numeric_energy: None,
            numeric_separation: None,
            agreement: None,
            detail: None,
        }
    } else {
        let g = bilayer_global_with(&m, &p.options)?;
        BilayerReport {
            delta_bar: p.delta_bar,
            rho: g.rho_star,
            energy: g.energy,
            numeric_energy: Some(g.numeric.energy),
            numeric_separation: Some(g.numeric_separation),
            agreement: Some(g.agreement),
            detail: Some(g),
        }
    };
    Ok((to_value(&p)?, report))
}

// ---- scan ----

#[derive(Debug, Clone, Args)]
pub struct ScanFlags {
    #[arg(long)]
    pub delta_bar: Option<f64>,
    /// Separation grid, e.g. 0:0.2:0.002.
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long = "L0")]
    pub l0: Option<f64>,
    /// Also relax the equal-radius constraint at every r.
    #[arg(long)]
    pub asymmetric: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanParams {
    pub delta_bar: f64,
    pub r: String,
    #[serde(rename = "L0")]
    pub l0: f64,
    pub asymmetric: bool,
    pub options: ScanOptions,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            delta_bar: 0.25,
            r: "0:0.2:0.002".into(),
            l0: DEFAULT_L0,
            asymmetric: false,
            options: ScanOptions::default(),
        }
    }
}

pub const SCAN_SCHEMA: Schema = Schema {
    name: "scan",
    columns: &["r", "energy", "rho_opt", "c1_opt", "c2_opt"],
};

const SCAN_ASYM_SCHEMA: Schema = Schema {
    name: "scan_asymmetric",
    columns: &[
        "r",
        "energy",
        "rho_opt",
        "c1_opt",
        "c2_opt",
        "free_energy",
        "rho1",
        "rho2",
        "c1_free",
        "c2_free",
    ],
};

fn scan(f: &ScanFlags, mut p: ScanParams) -> Result<(Value, Vec<Vec<Cell>>)> {
    set!(p, f, delta_bar, r, l0);
    if f.asymmetric {
        p.asymmetric = true;
    }
    let m = model(p.delta_bar, 0.0, 0.0, p.l0)?;
    let grid = parse_grid("params.r", &p.r)?;
    let rows = separation_scan_with(&m, &grid, &p.options)?;
    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut cells: Vec<Cell> = vec![
            row.r.into(),
            row.energy.into(),
            row.rho_opt.into(),
            row.c1_opt.into(),
            row.c2_opt.into(),
        ];
        if p.asymmetric {
            let a = asymmetric_check(&m, row, &p.options)?;
            cells.extend([
                a.free_energy.into(),
                a.rho1.into(),
                a.rho2.into(),
                a.c1.into(),
                a.c2.into(),
            ]);
        }
        out.push(cells);
    }
    Ok((to_value(&p)?, out))
}

// ---- landscape ----

#[derive(Debug, Clone, Args)]
pub struct LandscapeFlags {
    #[arg(long)]
    pub delta_bar: Option<f64>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long = "L0")]
    pub l0: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeParams {
    pub delta_bar: f64,
    pub rho: String,
    pub r: String,
    #[serde(rename = "L0")]
    pub l0: f64,
}

impl Default for LandscapeParams {
    fn default() -> Self {
        LandscapeParams {
            delta_bar: 0.25,
            rho: "log:1e-4:0.099:100".into(),
            r: "0:0.2:0.004".into(),
            l0: DEFAULT_L0,
        }
    }
}

const LANDSCAPE_SCHEMA: Schema = Schema {
    name: "landscape",
    columns: &["rho", "r", "energy", "c1", "c2", "neg_log_neg_energy"],
};

fn landscape(f: &LandscapeFlags, mut p: LandscapeParams) -> Result<(Value, Vec<Vec<Cell>>)> {
    set!(p, f, delta_bar, rho, r, l0);
    let m = model(p.delta_bar, 0.0, 0.0, p.l0)?;
    let g = landscape_grid(&m, &parse_grid("params.rho", &p.rho)?, &parse_grid("params.r", &p.r)?)?;
    let rows = g
        .cells
        .iter()
        .map(|c| {
            vec![
                c.rho.into(),
                c.r.into(),
                c.energy.into(),
                c.c1.into(),
                c.c2.into(),
                c.neg_log_neg_energy.into(),
            ]
        })
        .collect();
    Ok((to_value(&p)?, rows))
}

// ---- oracle ----

#[derive(Debug, Clone, Args)]
pub struct OracleFlags {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Truncation parameters for the radial checks, e.g. 25,50,100.
    #[arg(long = "L")]
    pub l: Option<String>,
    #[arg(long)]
    pub kappa_bar: Option<f64>,
    #[arg(long)]
    pub h_bar: Option<f64>,
    #[arg(long)]
    pub degree_grid: Option<usize>,
    /// qρ values for the transform check; 0 gives the limit row.
    #[arg(long)]
    pub q_rho: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleParams {
    pub rho: f64,
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: String,
    pub kappa_bar: f64,
    pub h_bar: f64,
    pub degree_rho: f64,
    #[serde(rename = "degree_L")]
    pub degree_l: f64,
    pub degree_half_width: f64,
    pub degree_grid: usize,
    #[serde(rename = "fourier_L")]
    pub fourier_l: f64,
    pub q_rho: String,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            rho: 0.05,
            theta: 0.0,
            l: "25,50,100".into(),
            kappa_bar: 0.1,
            h_bar: 0.1,
            degree_rho: 0.1,
            degree_l: 20.0,
            degree_half_width: 3.0,
            degree_grid: 1024,
            fourier_l: 100.0,
            q_rho: "0,0.01,0.05,0.1,0.2,0.5,1".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
    pub radial: Vec<Value>,
    pub fourier: Vec<FourierRow>,
    pub warnings: Vec<String>,
    pub all_pass: bool,
}

const ORACLE_SCHEMA: Schema = Schema {
    name: "oracle",
    columns: &["check", "value", "reference", "pass"],
};

/// Expansion-validation suite over the truncated BP profile.
pub fn oracle_suite(p: &OracleParams) -> Result<OracleReport> {
    let mut checks = Vec::new();
    let mut radial = Vec::new();
    let mut warnings = Vec::new();
    let m = model(0.1, p.kappa_bar, p.h_bar, DEFAULT_L0)?;
    let ls = parse_grid("params.L", &p.l)?;

    let mut prev: Option<(f64, f64)> = None;
    for &l in &ls {
        let prof = BPProfile::new(p.rho, p.theta, l)?;
        let e = local_energies_radial(&prof, &m)?;
        let x = radial_expansion(&prof, &m);
        let ratio = (e.exchange - 8.0 * PI) / x.exchange_excess;
        let an_err = ((e.anisotropy - x.anisotropy) / x.anisotropy).abs();
        let ze_err = if x.zeeman != 0.0 {
            ((e.zeeman - x.zeeman) / x.zeeman).abs()
        } else {
            0.0
        };
        checks.push(OracleCheck {
            name: format!("exchange_excess_ratio_L{l}"),
            value: ratio,
            reference: 1.0,
            pass: (ratio - 1.0).abs() <= 0.1,
        });
        if let Some((pa, pz)) = prev {
            checks.push(OracleCheck {
                name: format!("anisotropy_error_decreasing_L{l}"),
                value: an_err,
                reference: pa,
                pass: an_err < pa,
            });
            checks.push(OracleCheck {
                name: format!("zeeman_error_decreasing_L{l}"),
                value: ze_err,
                reference: pz,
                pass: ze_err < pz || pz == 0.0,
            });
        }
        prev = Some((an_err, ze_err));
        radial.push(serde_json::json!({
            "L": l,
            "radial": e,
            "expansion": x,
        }));
    }

    let dp = BPProfile::new(p.degree_rho, p.theta, p.degree_l)?;
    let h = p.degree_half_width;
    let d = topological_degree(&dp, p.degree_grid, -h, h)?;
    warnings.extend(d.warnings);
    checks.push(OracleCheck {
        name: "topological_degree".into(),
        value: d.degree,
        reference: 1.0,
        pass: (d.degree - 1.0).abs() <= 5e-3,
    });

    let (norm, jump) = profile_invariants(&dp, 201, h);
    checks.push(OracleCheck {
        name: "unit_norm_max_deviation".into(),
        value: norm,
        reference: 0.0,
        pass: norm < 1e-12,
    });
    checks.push(OracleCheck {
        name: "junction_jump".into(),
        value: jump,
        reference: 0.0,
        pass: jump < 1e-12,
    });

    let fp = BPProfile::new(p.rho, p.theta, p.fourier_l)?;
    let qs: Vec<f64> = parse_grid("params.q_rho", &p.q_rho)?
        .iter()
        .map(|x| x / p.rho)
        .collect();
    let fourier = fourier_tail_check(&fp, &qs)?;
    for row in &fourier {
        let (tol, tag) = if row.limit_row {
            (0.05, "limit".to_string())
        } else {
            (0.1, format!("{}", row.q_rho))
        };
        if row.limit_row || (row.q_rho >= 0.05 && !row.regime_violation) {
            for (which, v) in [("parallel", row.ratio_parallel), ("perp", row.ratio_perp)] {
                checks.push(OracleCheck {
                    name: format!("fourier_{which}_qrho_{tag}"),
                    value: v,
                    reference: 1.0,
                    pass: (v - 1.0).abs() <= tol,
                });
            }
        }
    }
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(OracleReport {
        checks,
        radial,
        fourier,
        warnings,
        all_pass,
    })
}

/// Largest deviation from unit norm on an n×n sample of [−h, h]², and the
/// largest jump of the field across the junction circle.
pub fn profile_invariants(p: &BPProfile, n: usize, h: f64) -> (f64, f64) {
    let mut norm = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let x = -h + 2.0 * h * i as f64 / (n - 1) as f64;
            let y = -h + 2.0 * h * j as f64 / (n - 1) as f64;
            let m = profile_value(p, [p.center[0] + x, p.center[1] + y]);
            norm = norm.max((1.0 - (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt()).abs());
        }
    }
    let rj = p.junction();
    let mut jump = 0.0_f64;
    for k in 0..64 {
        let phi = 2.0 * PI * k as f64 / 64.0;
        let (s, c) = phi.sin_cos();
        let inner = profile_value(p, [p.center[0] + rj * c, p.center[1] + rj * s]);
        let r_out = rj * (1.0 + 4.0 * f64::EPSILON);
        let outer = profile_value(p, [p.center[0] + r_out * c, p.center[1] + r_out * s]);
        for a in 0..3 {
            jump = jump.max((inner[a] - outer[a]).abs());
        }
    }
    (norm, jump)
}

fn oracle(f: &OracleFlags, mut p: OracleParams) -> Result<(Value, OracleReport)> {
    set!(p, f, rho, theta, l, kappa_bar, h_bar, degree_grid, q_rho);
    let r = oracle_suite(&p)?;
    Ok((to_value(&p)?, r))
}

// ---- dispatch ----

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Schema(e.to_string()))
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })
}

fn params<T: DeserializeOwned + Default>(v: &Value) -> Result<T> {
    if v.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(v.clone()).map_err(|e| Error::InvalidConfig(format!("params: {e}")))
}

/// Parse arguments, run, and write the output. Returns what was produced.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = read(path)?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let name = cli.command.name();
    if let Some(c) = &cfg.command {
        if c != name {
            return Err(Error::InvalidConfig(format!(
                "command: config is for '{c}' but '{name}' was requested"
            )));
        }
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let digits = cli.precision.or(cfg.precision);
    if digits == Some(0) {
        return Err(Error::invalid("precision", "must be at least 1"));
    }
    let path = cli.output.clone().or(cfg.output.path.clone());
    let format_opt = cli.format.or(cfg.output.format);
    let table_format = format_opt.unwrap_or(Format::Csv);
    let doc_format = format_opt.unwrap_or(Format::Json);

    let table = |schema: &Schema, echo: Value, rows: Vec<Vec<Cell>>| -> Result<String> {
        let prov = Provenance::new(name, &echo)?;
        render_table(schema, &rows, table_format, &prov, digits)
    };
    let text = match &cli.command {
        Command::Nondim(f) => {
            let (echo, r) = nondim(f, params(&cfg.params)?)?;
            document(name, echo, &r, doc_format, digits)?
        }
        Command::Specfun(f) => {
            let (echo, rows) = specfun(f, params(&cfg.params)?)?;
            table(&SPECFUN_SCHEMA, echo, rows)?
        }
        Command::Kernels(f) => {
            let (echo, rows) = kernels(f, params(&cfg.params)?)?;
            table(&KERNELS_SCHEMA, echo, rows)?
        }
        Command::Shapefun(f) => {
            let (echo, rows) = shapefun(f, params(&cfg.params)?)?;
            table(&SHAPEFUN_SCHEMA, echo, rows)?
        }
        Command::Energy(f) => {
            let (echo, b) = energy(f, params(&cfg.params)?)?;
            match doc_format {
                Format::Json => document(name, echo, &b, Format::Json, digits)?,
                Format::Csv => table(&ENERGY_SCHEMA, echo, energy_rows(&b))?,
            }
        }
        Command::Minimize(f) => {
            let (echo, r) = minimize(f, params(&cfg.params)?, seed)?;
            match doc_format {
                Format::Json => document(name, echo, &r, Format::Json, digits)?,
                Format::Csv => {
                    let rows = r
                        .stack
                        .layers
                        .iter()
                        .zip(&r.boundary_flags)
                        .enumerate()
                        .map(|(n, (l, flag))| {
                            vec![
                                n.into(),
                                l.center[0].into(),
                                l.center[1].into(),
                                l.rho.into(),
                                l.theta.into(),
                                format!("{flag:?}").to_lowercase().into(),
                                r.energy.into(),
                                r.converged.into(),
                            ]
                        })
                        .collect();
                    table(&MINIMIZE_SCHEMA, echo, rows)?
                }
            }
        }
        Command::Bilayer(f) => {
            let (echo, r) = bilayer(f, params(&cfg.params)?)?;
            match doc_format {
                Format::Json => document(name, echo, &r, Format::Json, digits)?,
                Format::Csv => table(
                    &BILAYER_SCHEMA,
                    echo,
                    vec![vec![
                        r.delta_bar.into(),
                        r.rho.into(),
                        r.energy.into(),
                        r.numeric_energy.into(),
                        r.numeric_separation.into(),
                        r.agreement.map_or(Cell::Null, Cell::Bool),
                    ]],
                )?,
            }
        }
        Command::Scan(f) => {
            let asym = f.asymmetric;
            let (echo, rows) = scan(f, params(&cfg.params)?)?;
            let asym = asym || echo.get("asymmetric").and_then(Value::as_bool).unwrap_or(false);
            table(if asym { &SCAN_ASYM_SCHEMA } else { &SCAN_SCHEMA }, echo, rows)?
        }
        Command::Landscape(f) => {
            let (echo, rows) = landscape(f, params(&cfg.params)?)?;
            table(&LANDSCAPE_SCHEMA, echo, rows)?
        }
        Command::Oracle(f) => {
            let (echo, r) = oracle(f, params(&cfg.params)?)?;
            match doc_format {
                Format::Json => document(name, echo, &r, Format::Json, digits)?,
                Format::Csv => {
                    let rows = r
                        .checks
                        .iter()
                        .map(|c| vec![c.name.clone().into(), c.value.into(), c.reference.into(), c.pass.into()])
                        .collect();
                    table(&ORACLE_SCHEMA, echo, rows)?
                }
            }
        }
    };
    if let Some(p) = &path {
        write_atomic(p, &text)?;
    }
    Ok(Outcome { text, path })
}

fn document<T: Serialize>(
    name: &str,
    echo: Value,
    result: &T,
    format: Format,
    digits: Option<usize>,
) -> Result<String> {
    if format == Format::Csv {
        return Err(Error::invalid(
            "output.format",
            format!("'{name}' produces a JSON document"),
        ));
    }
    let prov = Provenance::new(name, &echo)?;
    render_document(result, &prov, digits)
}

/// Process entry point; returns the exit status.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            if o.path.is_none() {
                print!("{}", o.text);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
