//! Separation scan and landscape tables for the equal-radius bilayer.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy_min_over_angles;
use super::nelder_mead::{brent_min, nelder_mead, Bounds, NmOptions};
use crate::energy::{bilayer_f2sym, F2Sym};
use crate::error::{Error, Result};
use crate::shapefun::QuadratureSpec;
use crate::units::RescaledParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanOptions {
    pub rho_floor: f64,
    pub margin: f64,
    /// Log-spaced radii in the coarse pass.
    pub grid_points: usize,
    /// Relative tolerance of the refinement in ln ρ.
    pub refine_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            rho_floor: 1e-6,
            margin: 1e-9,
            grid_points: 240,
            refine_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub r: f64,
    pub energy: f64,
    pub rho_opt: f64,
    pub c1_opt: f64,
    pub c2_opt: f64,
}

fn require_regime(p: &RescaledParams) -> Result<()> {
    p.validate()?;
    if p.kappa_bar != 0.0 || p.h_bar != 0.0 {
        return Err(Error::invalid(
            "kappa_bar/h_bar",
            "the bilayer scan requires kappa_bar = h_bar = 0",
        ));
    }
    Ok(())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn refine(p: &RescaledParams, r: f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, F2Sym)> {
    let mut err = None;
    let (y, _) = brent_min(
        |y| match bilayer_f2sym(y.exp(), r, p) {
            Ok(v) => v.energy,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo.ln(),
        hi.ln(),
        tol,
        300,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let rho = y.exp();
    Ok((rho, bilayer_f2sym(rho, r, p)?))
}

fn row(rho: f64, r: f64, v: F2Sym) -> ScanRow {
    ScanRow {
        r,
        energy: v.energy,
        rho_opt: rho,
        c1_opt: v.c1,
        c2_opt: v.c2,
    }
}

fn scan_one(p: &RescaledParams, r: f64, grid: &[f64], o: &ScanOptions) -> Result<ScanRow> {
    let vals: Vec<f64> = grid
        .iter()
        .map(|&rho| bilayer_f2sym(rho, r, p).map(|v| v.energy))
        .collect::<Result<_>>()?;
    let n = grid.len();
    let mut best: Option<ScanRow> = None;
    for i in 0..n {
        let left = i == 0 || vals[i] <= vals[i - 1];
        let right = i + 1 == n || vals[i] <= vals[i + 1];
        if !(left && right) {
            continue;
        }
        let lo = grid[i.saturating_sub(1)];
        let hi = grid[(i + 1).min(n - 1)];
        let (rho, v) = refine(p, r, lo, hi, o.refine_tol)?;
        let (rho, v) = if v.energy <= vals[i] {
            (rho, v)
        } else {
            (grid[i], bilayer_f2sym(grid[i], r, p)?)
        };
        if best.map_or(true, |b| v.energy < b.energy) {
            best = Some(row(rho, r, v));
        }
    }
    best.ok_or_else(|| Error::NonConvergence(format!("no local minimum found at r = {r}")))
}

/// Minimise the equal-radius bilayer energy over ρ for every separation.
pub fn separation_scan(p: &RescaledParams, r_grid: &[f64]) -> Result<Vec<ScanRow>> {
    separation_scan_with(p, r_grid, &ScanOptions::default())
}

pub fn separation_scan_with(p: &RescaledParams, r_grid: &[f64], o: &ScanOptions) -> Result<Vec<ScanRow>> {
    require_regime(p)?;
    if o.grid_points < 3 {
        return Err(Error::invalid("scan.grid_points", "at least 3 points are required"));
    }
    for (i, &r) in r_grid.iter().enumerate() {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::invalid(
                format!("r_grid[{i}]"),
                "must be non-negative and finite",
            ));
        }
    }
    let hi = p.rho_max() - o.margin;
    let grid = log_grid(o.rho_floor, hi, o.grid_points);
    let mut rows: Vec<ScanRow> = r_grid
        .par_iter()
        .map(|&r| scan_one(p, r, &grid, o))
        .collect::<Result<_>>()?;
    // seed each row from its predecessor's optimum
    for j in 1..rows.len() {
        let prev = rows[j - 1].rho_opt;
        let r = rows[j].r;
        let lo = (prev / 1.5).max(o.rho_floor);
        let up = (prev * 1.5).min(hi);
        let (rho, v) = refine(p, r, lo, up, o.refine_tol)?;
        if v.energy < rows[j].energy {
            rows[j] = row(rho, r, v);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeCell {
    pub rho: f64,
    pub r: f64,
    pub energy: f64,
    pub c1: f64,
    pub c2: f64,
    /// −ln(−F) where F < 0.
    pub neg_log_neg_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub params: RescaledParams,
    pub rho: Vec<f64>,
    pub r: Vec<f64>,
    /// r-major: cell (i_r, i_rho) is at i_r * rho.len() + i_rho.
    pub cells: Vec<LandscapeCell>,
}

impl LandscapeGrid {
    pub fn at(&self, i_r: usize, i_rho: usize) -> &LandscapeCell {
        &self.cells[i_r * self.rho.len() + i_rho]
    }

    pub fn argmin(&self) -> &LandscapeCell {
        self.cells
            .iter()
            .min_by(|a, b| a.energy.total_cmp(&b.energy))
            .expect("non-empty grid")
    }
}

/// Tabulate the equal-radius bilayer energy on a (ρ, r) grid.
pub fn landscape_grid(p: &RescaledParams, rho_grid: &[f64], r_grid: &[f64]) -> Result<LandscapeGrid> {
    require_regime(p)?;
    if rho_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::invalid("grid", "both axes need at least one value"));
    }
    let nr = rho_grid.len();
    let cells = (0..r_grid.len() * nr)
        .into_par_iter()
        .map(|idx| {
            let (r, rho) = (r_grid[idx / nr], rho_grid[idx % nr]);
            let v = bilayer_f2sym(rho, r, p)?;
            Ok(LandscapeCell {
                rho,
                r,
                energy: v.energy,
                c1: v.c1,
                c2: v.c2,
                neg_log_neg_energy: (v.energy < 0.0).then(|| -(-v.energy).ln()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandscapeGrid {
        params: *p,
        rho: rho_grid.to_vec(),
        r: r_grid.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricCheck {
    pub r: f64,
    pub symmetric_energy: f64,
    pub free_energy: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Relax the equal-radius constraint at one separation, starting from the
/// symmetric optimum. Reported, not asserted.
pub fn asymmetric_check(p: &RescaledParams, row: &ScanRow, o: &ScanOptions) -> Result<AsymmetricCheck> {
    require_regime(p)?;
    let q = QuadratureSpec {
        abs_tol: 1e-12,
        ..QuadratureSpec::default()
    };
    let centers = [[0.0, 0.0], [row.r, 0.0]];
    let lo = o.rho_floor.ln();
    let hi = (p.rho_max() - o.margin).ln();
    let f = |y: &[f64]| {
        energy_min_over_angles(&[y[0].exp(), y[1].exp()], &centers, p, &q)
            .map(|v| v.0)
            .unwrap_or(f64::INFINITY)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (a, b) in [(1.0, 1.0), (1.3, 0.7), (0.7, 1.3)] {
        let y0 = [
            (row.rho_opt * a).min(p.rho_max() * 0.999).ln(),
            (row.rho_opt * b).min(p.rho_max() * 0.999).ln(),
        ];
        let r = nelder_mead(
            f,
            &y0,
            &[0.2, 0.2],
            Some(Bounds {
                lower: &[lo, lo],
                upper: &[hi, hi],
            }),
            NmOptions::default(),
        );
        if best.as_ref().map_or(true, |(_, v)| r.f < *v) {
            best = Some((r.x, r.f));
        }
    }
    let (y, _) = best.expect("three starts");
    let rhos = [y[0].exp(), y[1].exp()];
    let (e, c) = energy_min_over_angles(&rhos, &centers, p, &q)?;
    Ok(AsymmetricCheck {
        r: row.r,
        symmetric_energy: row.energy,
        free_energy: e,
        rho1: rhos[0],
        rho2: rhos[1],
        c1: c[0],
        c2: c[1],
    })
}
