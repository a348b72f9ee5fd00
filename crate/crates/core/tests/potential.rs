//! Potential geometry against values computed independently in 40-digit
//! arithmetic (mpmath bisection on V(u) = h).

#![allow(clippy::excessive_precision)]

use bounce_core::potential::{
    gamma_threshold, schaaf_closed_form, schaaf_expression, PowerLawPotential,
};
use bounce_core::Error;
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn quarter_exponent_geometry() {
    let p = PowerLawPotential::new(0.25, -1.5).unwrap();
    assert!(close(p.center(), 0.19753086419753086, 1e-14));
    assert!(close(p.center_energy(), -0.098765432098765432, 1e-14));
    assert!(close(p.annulus_edge(), 0.62429507696997409, 1e-14));
    let tp = p.turning_points(-0.05).unwrap();
    assert!(close(tp.inner.unwrap(), 0.02878445470540464, 1e-12));
    assert!(close(tp.outer, 0.47630052133174881, 1e-12));
    let tp = p.turning_points(2.0).unwrap();
    assert_eq!(tp.inner, None);
    assert!(close(tp.outer, 3.709048410480514, 1e-12));
}

#[test]
fn three_quarter_exponent_geometry() {
    let p = PowerLawPotential::new(0.75, -2.0).unwrap();
    assert!(close(p.center(), 0.39685026299204987, 1e-14));
    assert!(close(p.center_energy(), -2.3811015779522992, 1e-14));
    assert!(close(p.annulus_edge(), 2.5198420997897463, 1e-14));
    let tp = p.turning_points(-1.0).unwrap();
    assert!(close(tp.inner.unwrap(), 0.0040338412486403662, 1e-12));
    assert!(close(tp.outer, 1.8243932834975497, 1e-12));
}

#[test]
fn guard_thresholds() {
    let g = gamma_threshold(0.25, -1.5, -2.5).unwrap();
    assert!(close(g.eta, 0.62429507696997409, 1e-14));
    assert!(close(g.gamma, 1.1174033085417047, 1e-14));
    let g = gamma_threshold(0.75, -1.0, -1.2).unwrap();
    assert!(close(g.eta, 6.3496042078727979, 1e-14));
    assert!(close(g.gamma, 1.593688075863379, 1e-14));
    // reference forcing -2 + 0.1 cos t: sqrt(0.4) / 0.95
    let g = gamma_threshold(0.5, -1.9, -2.1).unwrap();
    assert!(close(g.gamma, 0.4f64.sqrt() / 0.95, 1e-14));
}

#[test]
fn energies_below_the_center_are_rejected() {
    let p = PowerLawPotential::new(0.25, -1.5).unwrap();
    assert!(matches!(
        p.turning_points(-0.1),
        Err(Error::BelowCenter { .. })
    ));
}

#[test]
fn parameters_outside_the_model_are_rejected() {
    assert!(PowerLawPotential::new(1.0, -1.0).is_err());
    assert!(PowerLawPotential::new(0.0, -1.0).is_err());
    assert!(PowerLawPotential::new(0.5, 0.0).is_err());
    assert!(gamma_threshold(0.5, -2.1, -1.9).is_err());
}

proptest! {
    #[test]
    fn turning_points_solve_the_energy_equation(
        alpha in 0.05f64..0.95,
        p0 in -5.0f64..-0.2,
        s in 0.01f64..0.99,
    ) {
        let p = PowerLawPotential::new(alpha, p0).unwrap();
        let vc = p.center_energy();
        let h = vc * (1.0 - s);
        let tp = p.turning_points(h).unwrap();
        let inner = tp.inner.unwrap();
        prop_assert!(inner < p.center() && p.center() < tp.outer);
        let scale = vc.abs();
        prop_assert!((p.value(inner) - h).abs() <= 1e-9 * scale);
        prop_assert!((p.value(tp.outer) - h).abs() <= 1e-9 * scale);
    }

    #[test]
    fn center_is_the_unique_critical_point(alpha in 0.05f64..0.95, p0 in -5.0f64..-0.2) {
        let p = PowerLawPotential::new(alpha, p0).unwrap();
        let uc = p.center();
        prop_assert!(p.slope(uc).abs() <= 1e-12 * (-p0));
        prop_assert!(p.slope(0.5 * uc) < 0.0 && p.slope(2.0 * uc) > 0.0);
        prop_assert!(p.value(p.annulus_edge()).abs() <= 1e-10 * p.annulus_edge() * (-p0));
    }

    #[test]
    fn schaaf_expression_matches_its_closed_form(alpha in 0.05f64..0.95, log_u in -3.0f64..3.0) {
        let p = PowerLawPotential::new(alpha, -1.0).unwrap();
        let u = 10f64.powf(log_u);
        let d = p.eval_derivatives(u).unwrap();
        let scale = 5.0 * d.d3 * d.d3 + 3.0 * (d.d2 * d.d4).abs();
        let err = (schaaf_expression(&p, u).unwrap() - schaaf_closed_form(alpha, u)).abs();
        prop_assert!(err <= 1e-12 * scale);
    }
}
