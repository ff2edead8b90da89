use std::f64::consts::PI;

use skystack::bp_oracle::*;
use skystack::cli::profile_invariants;
use skystack::units::RescaledParams;

fn model(kappa_bar: f64, h_bar: f64) -> RescaledParams {
    RescaledParams::new(0.1, kappa_bar, h_bar, 10.0).unwrap()
}

fn near(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
    a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn pointwise_values() {
    let p = BPProfile::new(0.1, 0.0, 50.0).unwrap();
    assert_eq!(profile_value(&p, [0.0, 0.0]), [0.0, 0.0, 1.0]);
    assert!(near(profile_value(&p, [0.1, 0.0]), [-1.0, 0.0, 0.0], 1e-15));
    let far = profile_value(&p, [200.0, 0.0]);
    assert!(near(far, [0.0, 0.0, -1.0], 1e-10), "{far:?}");
    let b = BPProfile::new(0.1, PI / 2.0, 50.0).unwrap();
    assert!(near(profile_value(&b, [0.1, 0.0]), [0.0, -1.0, 0.0], 1e-15));
    let shifted = BPProfile {
        center: [1.0, -2.0],
        ..p
    };
    assert!(near(
        profile_value(&shifted, [1.05, -2.0]),
        profile_value(&p, [0.05, 0.0]),
        1e-14
    ));
}

#[test]
fn core_amplitude_and_tail_derivative() {
    let p = BPProfile::new(0.2, 0.0, 36.0).unwrap();
    let (f, fp) = p.f_l(1.0);
    assert_eq!((f, fp), (1.0, 0.0));
    // derivative of the tail against a central difference
    let s = 20.0;
    let h = 1e-5;
    let d = (p.f_l(s + h).0 - p.f_l(s - h).0) / (2.0 * h);
    assert!((d - p.f_l(s).1).abs() < 1e-9 * d.abs().max(1e-12));
    // continuous at the junction s = √L
    let below = p.f_l(6.0).0;
    let above = p.f_l(6.0 * (1.0 + 1e-15)).0;
    assert!((below - above).abs() < 1e-13);
}

#[test]
fn invariants_hold() {
    for (rho, l) in [(0.1, 20.0), (0.05, 100.0), (0.3, 4.0)] {
        let p = BPProfile::new(rho, 0.7, l).unwrap();
        let (norm, jump) = profile_invariants(&p, 201, 3.0);
        assert!(norm < 1e-12 && jump < 1e-12, "rho = {rho}, L = {l}: {norm} {jump}");
    }
}

#[test]
fn degree_of_reference_profile() {
    let p = BPProfile::new(0.1, 0.0, 20.0).unwrap();
    let d = topological_degree(&p, 1024, -3.0, 3.0).unwrap();
    assert!((d.degree - 1.0).abs() < 5e-3, "{}", d.degree);
    assert!(!d.warnings.is_empty());
    let short = BPProfile::new(0.1, 0.0, 5.0).unwrap();
    let wide = topological_degree(&short, 1024, -3.0, 3.0).unwrap();
    assert!(wide.warnings.is_empty());
}

#[test]
fn degree_is_independent_of_rotation_angle() {
    let a = topological_degree(&BPProfile::new(0.1, 0.0, 20.0).unwrap(), 256, -3.0, 3.0).unwrap();
    let b = topological_degree(&BPProfile::new(0.1, 2.1, 20.0).unwrap(), 256, -3.0, 3.0).unwrap();
    assert!((a.degree - b.degree).abs() < 1e-12);
}

#[test]
fn degree_improves_with_refinement() {
    let p = BPProfile::new(0.1, 0.0, 20.0).unwrap();
    let coarse = topological_degree(&p, 256, -3.0, 3.0).unwrap().degree;
    let fine = topological_degree(&p, 1024, -3.0, 3.0).unwrap().degree;
    assert!((fine - 1.0).abs() < (coarse - 1.0).abs(), "{coarse} {fine}");
}

#[test]
fn uniform_field_has_zero_degree() {
    let d = degree_of(|_| [0.0, 0.0, -1.0], 64, -1.0, 1.0, None).unwrap();
    assert_eq!(d.degree, 0.0);
    let tilted = degree_of(
        |x| {
            let a = 0.3 * x[0];
            [a.sin(), 0.0, -a.cos()]
        },
        64,
        -1.0,
        1.0,
        None,
    )
    .unwrap();
    assert!(tilted.degree.abs() < 1e-12);
    assert!(degree_of(|_| [0.0, 0.0, 1.0], 2, -1.0, 1.0, None).is_err());
}

#[test]
fn exchange_excess_approaches_expansion() {
    let m = model(0.0, 0.0);
    let mut prev = f64::INFINITY;
    for l in [25.0, 50.0, 100.0] {
        let p = BPProfile::new(0.05, 0.0, l).unwrap();
        let e = local_energies_radial(&p, &m).unwrap();
        let x = radial_expansion(&p, &m);
        let ratio = (e.exchange - 8.0 * PI) / x.exchange_excess;
        assert!((ratio - 1.0).abs() <= 0.1, "L = {l}: {ratio}");
        assert!((ratio - 1.0).abs() < prev);
        prev = (ratio - 1.0).abs();
    }
}

#[test]
fn anisotropy_and_zeeman_converge() {
    let m = model(0.1, 0.1);
    let err = |l: f64| {
        let p = BPProfile::new(0.05, 0.0, l).unwrap();
        let e = local_energies_radial(&p, &m).unwrap();
        let x = radial_expansion(&p, &m);
        (
            ((e.anisotropy - x.anisotropy) / x.anisotropy).abs(),
            ((e.zeeman - x.zeeman) / x.zeeman).abs(),
        )
    };
    let (a1, z1) = err(25.0);
    let (a2, z2) = err(100.0);
    assert!(a2 < a1 && z2 < z1);
    assert!(a2 < 0.05 && z2 < 0.05, "{a2} {z2}");
}

#[test]
fn dmi_follows_cosine() {
    let m = model(0.1, 0.0);
    let neel = local_energies_radial(&BPProfile::new(0.05, 0.0, 100.0).unwrap(), &m).unwrap();
    let bloch = local_energies_radial(&BPProfile::new(0.05, PI / 2.0, 100.0).unwrap(), &m).unwrap();
    assert!(bloch.dmi.abs() < 1e-15);
    let x = radial_expansion(&BPProfile::new(0.05, 0.0, 100.0).unwrap(), &m);
    assert!(neel.dmi < 0.0);
    assert!(((neel.dmi - x.dmi) / x.dmi).abs() < 0.05, "{} {}", neel.dmi, x.dmi);
}

#[test]
fn transforms_in_small_wavevector_regime() {
    let p = BPProfile::new(0.05, 0.0, 100.0).unwrap();
    let rows = fourier_tail_check(&p, &[0.0, 0.05 / 0.05, 0.1 / 0.05, 1.0 / 0.05]).unwrap();
    assert!(rows[0].limit_row && rows[0].l_used >= 10.0 / LIMIT_Q_RHO);
    assert!((rows[0].ratio_parallel - 1.0).abs() < 0.05 && (rows[0].ratio_perp - 1.0).abs() < 0.05);
    for r in &rows[1..3] {
        assert!(!r.regime_violation);
        assert!(
            (r.ratio_parallel - 1.0).abs() < 0.1 && (r.ratio_perp - 1.0).abs() < 0.1,
            "{r:?}"
        );
    }
    assert!(rows[3].regime_violation);
}

#[test]
fn larger_truncation_improves_transform() {
    let q = [0.1 / 0.05];
    let short = fourier_tail_check(&BPProfile::new(0.05, 0.0, 10.0).unwrap(), &q).unwrap()[0];
    let long = fourier_tail_check(&BPProfile::new(0.05, 0.0, 100.0).unwrap(), &q).unwrap()[0];
    assert!((long.ratio_perp - 1.0).abs() < (short.ratio_perp - 1.0).abs());
}

#[test]
fn invalid_profiles() {
    assert!(BPProfile::new(0.0, 0.0, 10.0).is_err());
    assert!(BPProfile::new(0.1, 0.0, 1.0).is_err());
    assert!(BPProfile::new(0.1, f64::NAN, 10.0).is_err());
    assert!(fourier_tail_check(&BPProfile::new(0.1, 0.0, 10.0).unwrap(), &[-1.0]).is_err());
}
