//! Adaptive Gauss–Kronrod (10/21) quadrature, scalar and vector valued.

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 500,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    /// Largest per-component error estimate.
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

/// One 21-point Kronrod panel; returns (value, error) per component.
pub fn gk21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        fv1[j] = f(center - x);
        fv2[j] = f(center + x);
    }
    let mut value = [0.0; N];
    let mut err = [0.0; N];
    for c in 0..N {
        let mut kron = fc[c] * WGK[10];
        let mut gauss = 0.0;
        let mut res_abs = kron.abs();
        for j in 0..10 {
            let s = fv1[j][c] + fv2[j][c];
            kron += WGK[j] * s;
            res_abs += WGK[j] * (fv1[j][c].abs() + fv2[j][c].abs());
            if j % 2 == 1 {
                gauss += WG[j / 2] * s;
            }
        }
        let mean = 0.5 * kron;
        let mut res_asc = WGK[10] * (fc[c] - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((fv1[j][c] - mean).abs() + (fv2[j][c] - mean).abs());
        }
        let h = half.abs();
        value[c] = kron * half;
        err[c] = rescale_error((kron - gauss) * half, res_abs * h, res_asc * h);
    }
    (value, err)
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    err: [f64; N],
}

impl<const N: usize> Panel<N> {
    fn worst(&self) -> f64 {
        self.err.iter().fold(0.0, |m, e| m.max(*e))
    }
}

/// Globally adaptive bisection on [a, b] for a vector-valued integrand.
pub fn integrate_vec<const N: usize, F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let (value, err) = gk21(&mut f, a, b);
    let mut panels = vec![Panel { a, b, value, err }];
    loop {
        let mut total = [0.0; N];
        let mut errs = [0.0; N];
        for p in &panels {
            for c in 0..N {
                total[c] += p.value[c];
                errs[c] += p.err[c];
            }
        }
        let mut ok = true;
        let mut worst = 0.0f64;
        for c in 0..N {
            worst = worst.max(errs[c]);
            if errs[c] > opts.abs_tol.max(opts.rel_tol * total[c].abs()) {
                ok = false;
            }
        }
        if ok || panels.len() >= opts.max_intervals {
            return QuadResult {
                value: total,
                error: worst,
                intervals: panels.len(),
                converged: ok,
            };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.worst().total_cmp(&y.1.worst()))
            .expect("non-empty");
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval exhausted at machine resolution
            panels.push(p);
            return QuadResult {
                value: total,
                error: worst,
                intervals: panels.len(),
                converged: false,
            };
        }
        let (v1, e1) = gk21(&mut f, p.a, mid);
        let (v2, e2) = gk21(&mut f, mid, p.b);
        panels.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            err: e1,
        });
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            err: e2,
        });
    }
}

/// Scalar adaptive quadrature; non-convergence is an error.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: QuadOptions, what: &str) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x| [f(x)], a, b, opts);
    check(r, opts, what).map(|v| v[0])
}

/// ∫_a^∞ f via x = a + t/(1 − t).
pub fn integrate_to_inf<F>(mut f: F, a: f64, opts: QuadOptions, what: &str) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(
        |t| {
            if t >= 1.0 {
                return [0.0];
            }
            let om = 1.0 - t;
            let v = f(a + t / om);
            [if v == 0.0 { 0.0 } else { v / (om * om) }]
        },
        0.0,
        1.0,
        opts,
    );
    check(r, opts, what).map(|v| v[0])
}

pub(crate) fn check<const N: usize>(r: QuadResult<N>, opts: QuadOptions, what: &str) -> Result<[f64; N]> {
    if r.converged && r.value.iter().all(|v| v.is_finite()) {
        Ok(r.value)
    } else {
        Err(Error::Numeric {
            what: what.to_string(),
            estimate: r.error,
            requested: opts.abs_tol,
        })
    }
}
