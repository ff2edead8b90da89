//! Derivative-free local minimisers: Nelder–Mead with box projection and
//! Brent's method on an interval.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmOptions {
    pub max_evals: usize,
    pub xtol: f64,
    pub ftol_abs: f64,
    pub ftol_rel: f64,
    pub restarts: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            max_evals: 4000,
            xtol: 1e-10,
            ftol_abs: 1e-15,
            ftol_rel: 1e-13,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

pub struct Bounds<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

fn project(x: &mut [f64], b: Option<&Bounds>) {
    if let Some(b) = b {
        for i in 0..x.len() {
            x[i] = x[i].clamp(b.lower[i], b.upper[i]);
        }
    }
}

/// Nelder–Mead with restarts from the best vertex. Non-finite objective
/// values are treated as +∞.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], bounds: Option<Bounds>, opts: NmOptions) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut x = x0.to_vec();
    project(&mut x, bounds.as_ref());
    let mut total_evals = 0;
    let mut total_iters = 0;
    let mut scale = 1.0;
    let mut last: Option<NmResult> = None;
    for _ in 0..=opts.restarts {
        let st: Vec<f64> = step.iter().map(|s| s * scale).collect();
        let budget = opts.max_evals.saturating_sub(total_evals);
        if budget < x.len() + 2 {
            break;
        }
        let r = nm_once(&mut eval, &x, &st, bounds.as_ref(), opts, budget);
        total_evals += r.evals;
        total_iters += r.iterations;
        let improved = match &last {
            Some(prev) => prev.f - r.f > opts.ftol_abs + opts.ftol_rel * prev.f.abs(),
            None => true,
        };
        let done = r.converged && !improved && last.is_some();
        let converged = r.converged;
        x = r.x.clone();
        last = Some(NmResult {
            evals: total_evals,
            iterations: total_iters,
            ..r
        });
        if done {
            break;
        }
        if !converged {
            continue;
        }
        scale *= 0.1;
    }
    let mut r = last.unwrap_or(NmResult {
        f: eval(&x),
        x,
        evals: total_evals,
        iterations: total_iters,
        converged: false,
    });
    r.evals = total_evals.max(r.evals);
    r
}

fn nm_once<F>(f: &mut F, x0: &[f64], step: &[f64], b: Option<&Bounds>, opts: NmOptions, budget: usize) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        project(&mut v, b);
        if v[i] == x0[i] {
            v[i] -= step[i];
            project(&mut v, b);
        }
        simplex.push(v);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    let mut iterations = 0;
    let mut converged = false;
    while evals < budget {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&i, &j| fv[i].total_cmp(&fv[j]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        fv = idx.iter().map(|&i| fv[i]).collect();

        let fspread = fv[n] - fv[0];
        let xspread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, c)| (a - c).abs()))
            .fold(0.0f64, f64::max);
        if fspread.is_finite() && fspread <= opts.ftol_abs + opts.ftol_rel * fv[0].abs() && xspread <= opts.xtol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..n)
                .map(|i| centroid[i] + t * (simplex[n][i] - centroid[i]))
                .collect();
            project(&mut p, b);
            p
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < fv[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
            continue;
        }
        if fr < fv[n - 1] {
            simplex[n] = xr;
            fv[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < fv[n] {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < fv[n].min(fr) {
            simplex[n] = xc;
            fv[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for j in 1..=n {
            let mut p: Vec<f64> = (0..n)
                .map(|i| simplex[0][i] + 0.5 * (simplex[j][i] - simplex[0][i]))
                .collect();
            project(&mut p, b);
            fv[j] = f(&p);
            simplex[j] = p;
        }
        evals += n;
    }
    let best = (0..=n).min_by(|&i, &j| fv[i].total_cmp(&fv[j])).unwrap_or(0);
    NmResult {
        x: simplex[best].clone(),
        f: fv[best],
        evals,
        iterations,
        converged,
    }
}

/// Brent's minimiser on [a, b]; returns (x, f(x)).
pub fn brent_min<F>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const CGOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = if a < b { (a, b) } else { (b, a) };
    let mut x = a + CGOLD * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-300;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}
