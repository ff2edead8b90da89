use std::f64::consts::PI;

use skystack::energy::{bilayer_f, bilayer_f2sym, reduced_local};
use skystack::optimize::*;
use skystack::units::RescaledParams;

const PI3: f64 = PI * PI * PI;

fn params(db: f64, kb: f64) -> RescaledParams {
    RescaledParams::new(db, kb, 0.0, 10.0).unwrap()
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    while (b - a).abs() > tol {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

#[test]
fn single_layer_without_dmi_is_bloch() {
    let p = params(0.25, 0.0);
    let r = minimize_fixed_positions(&[[0.0, 0.0]], &p).unwrap();
    assert!(r.converged, "{:?}", r.warnings);
    let layer = &r.stack.layers[0];
    assert!(layer.theta.cos().abs() < 1e-9, "θ = {}", layer.theta);
    // with cos θ = 0 only the local part and −δ̄π³ρ/8 remain
    let f = |rho: f64| reduced_local(rho) - 0.25 * PI3 / 8.0 * rho;
    let g = golden_section(f, 1e-5, 0.0999, 1e-13);
    assert!((layer.rho - g).abs() < 1e-6, "{} vs {g}", layer.rho);
    assert!((r.energy - f(g)).abs() < 1e-10);
}

#[test]
fn single_layer_dmi_tilts_towards_neel() {
    let p = params(0.05, 0.1);
    let r = minimize_fixed_positions(&[[0.0, 0.0]], &p).unwrap();
    assert!(r.converged);
    let l = &r.stack.layers[0];
    // ∂/∂c of δ̄π³ρ(3c²−1)/8 − 8πκ̄ρc vanishes at c = 32κ̄/(3δ̄π²), clamped to 1
    let c = (32.0 * 0.1 / (3.0 * 0.05 * PI * PI)).min(1.0);
    assert!((l.theta.cos() - c).abs() < 1e-9);
}

#[test]
fn coincident_pair_matches_closed_form() {
    let p = params(0.25, 0.0);
    let r = minimize_fixed_positions(&[[0.0, 0.0], [0.0, 0.0]], &p).unwrap();
    let g = bilayer_global(&p).unwrap();
    assert!(r.converged);
    for l in &r.stack.layers {
        assert!((l.rho - g.rho_star).abs() < 1e-6, "{} vs {}", l.rho, g.rho_star);
    }
    assert!((r.energy - g.energy).abs() < 1e-9);
    let (c1, c2) = (r.stack.layers[0].theta.cos(), r.stack.layers[1].theta.cos());
    assert!((c1 - 1.0).abs() < 1e-9 && (c2 + 1.0).abs() < 1e-9);
}

#[test]
fn no_stray_field_and_no_dmi_collapses() {
    let p = params(0.0, 0.0);
    let r = minimize_fixed_positions(&[[0.0, 0.0]], &p).unwrap();
    assert_eq!(r.boundary_flags, vec![BoundaryFlag::Floor]);
    assert!(!r.converged);
    assert!(r.any_boundary());
    assert!(r.gradient_norm.is_nan());
}

#[test]
fn empty_stack_and_bad_floor_are_rejected() {
    let p = params(0.1, 0.0);
    assert!(minimize_fixed_positions(&[], &p).is_err());
    let o = MinimizeOptions {
        rho_floor: 0.2,
        ..MinimizeOptions::default()
    };
    assert!(minimize_fixed_positions_with(&[[0.0, 0.0]], &p, &o).is_err());
}

#[test]
fn lambert_radius_grows_with_delta_bar() {
    let mut prev = 0.0;
    for db in [0.01, 0.05, 0.15, 0.25, 0.344, 0.37] {
        let r = bilayer_rho_star(db).unwrap();
        assert!(r > prev);
        prev = r;
    }
    assert!((bilayer_rho_star(0.344).unwrap() - 0.0937763).abs() < 1e-6);
    assert!(bilayer_rho_star(delta_bar_critical() * 1.0001).is_err());
    assert!(bilayer_rho_star(0.0).is_err());
}

#[test]
fn bilayer_global_agrees_with_numeric_search() {
    let p = params(0.25, 0.0);
    let g = bilayer_global(&p).unwrap();
    assert!(g.agreement, "{:?}", g.warnings);
    assert!((g.energy - 2.0 * bilayer_f(g.rho_star, &p).unwrap()).abs() < 1e-15);
    assert!(g.analytic.gradient_norm < 1e-5);
    assert!(g.numeric_separation < 1e-3);
    assert!(bilayer_global(&params(0.25, 0.1)).is_err());
}

#[test]
fn scan_minimum_is_at_coincidence() {
    let p = params(0.25, 0.0);
    let grid: Vec<f64> = (0..=20).map(|i| 0.01 * i as f64).collect();
    let rows = separation_scan(&p, &grid).unwrap();
    let best = rows.iter().min_by(|a, b| a.energy.total_cmp(&b.energy)).unwrap();
    assert_eq!(best.r, 0.0);
    let rho = bilayer_rho_star(0.25).unwrap();
    assert!((rows[0].rho_opt - rho).abs() < 1e-8, "{} vs {rho}", rows[0].rho_opt);
    assert!((rows[0].energy - 2.0 * bilayer_f(rho, &p).unwrap()).abs() < 1e-12);
    for w in rows.windows(2) {
        assert!(w[1].r > w[0].r);
    }
}

#[test]
fn scan_row_is_a_minimum_over_radius() {
    let p = params(0.25, 0.0);
    let rows = separation_scan(&p, &[0.03]).unwrap();
    let row = rows[0];
    for f in [0.9, 0.99, 1.01, 1.1] {
        let rho = (row.rho_opt * f).min(0.0999);
        assert!(bilayer_f2sym(rho, 0.03, &p).unwrap().energy >= row.energy - 1e-14);
    }
    let a = asymmetric_check(&p, &row, &ScanOptions::default()).unwrap();
    assert!(a.free_energy <= a.symmetric_energy + 1e-9);
}

#[test]
fn scan_rejects_unsupported_regime() {
    assert!(separation_scan(&params(0.25, 0.1), &[0.0]).is_err());
    assert!(separation_scan(&params(0.25, 0.0), &[-0.1]).is_err());
}

#[test]
fn landscape_minimum_and_cells() {
    let p = params(0.25, 0.0);
    let rho_star = bilayer_rho_star(0.25).unwrap();
    let mut rhos: Vec<f64> = (1..=19).map(|i| 0.005 * i as f64).collect();
    rhos.push(rho_star);
    let rs = [0.0, 0.02, 0.5];
    let g = landscape_grid(&p, &rhos, &rs).unwrap();
    let m = g.argmin();
    assert_eq!((m.rho, m.r), (rho_star, 0.0));
    for (i, &r) in rs.iter().enumerate() {
        let c = g.at(i, 9);
        assert_eq!((c.rho, c.r), (rhos[9], r));
        assert_eq!(c.energy, bilayer_f2sym(rhos[9], r, &p).unwrap().energy);
    }
    // small radii: the stray-field terms dominate and the energy is linear in ρ
    let tiny = landscape_grid(&p, &[1e-5], &[0.0, 0.5]).unwrap();
    assert!(tiny.cells.iter().all(|c| c.energy < 0.0 && c.energy.abs() < 2e-4));
    let slope = -2.0 * 0.25 * (PI3 / 4.0 + 4.0 * PI);
    assert!((tiny.cells[0].energy / 1e-5 / slope - 1.0).abs() < 0.02);
    for c in &g.cells {
        match c.neg_log_neg_energy {
            Some(v) => assert!(c.energy < 0.0 && (v + (-c.energy).ln()).abs() < 1e-15),
            None => assert!(c.energy >= 0.0),
        }
    }
}

#[test]
fn nelder_mead_rosenbrock() {
    let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
    let r = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], None, NmOptions::default());
    assert!(r.converged);
    assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
}

#[test]
fn brent_finds_parabola_vertex() {
    let (x, fx) = brent_min(|x| (x - 0.3).powi(2) + 2.0, -1.0, 1.0, 1e-12, 200);
    assert!((x - 0.3).abs() < 1e-7 && (fx - 2.0).abs() < 1e-14);
}
