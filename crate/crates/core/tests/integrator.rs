//! Forced integration with collisions. Fall times and speeds come from
//! 40-digit quadrature of `dt = du / sqrt(2 (E - V(u)))` (mpmath).

#![allow(clippy::excessive_precision)]

use std::f64::consts::TAU;

use bounce_core::integrator::{
    sandwich_check, write_collisions_jsonl, write_trajectory_csv, Forcing, Harmonic, Oscillator,
    Sampling,
};
use bounce_core::period::period_closed_form_half;
use bounce_core::potential::PowerLawPotential;
use bounce_core::Error;
use proptest::prelude::*;

fn autonomous(alpha: f64) -> Oscillator {
    Oscillator::new(alpha, Forcing::constant(-1.0).unwrap()).unwrap()
}

fn reference() -> Oscillator {
    Oscillator::new(
        0.5,
        Forcing::new(
            -2.0,
            vec![Harmonic {
                k: 1,
                a: 0.1,
                b: 0.0,
            }],
        )
        .unwrap(),
    )
    .unwrap()
}

#[test]
fn fall_from_rest_matches_quadrature() {
    for (alpha, u0, speed, time) in [
        (0.25, 5.0, 1.0408950957298113, 5.9608809804135193),
        (0.75, 10.0, 2.4028659387674165, 5.0809669288881332),
        (0.5, 9.0, 6f64.sqrt(), f64::NAN),
    ] {
        let (hit, _) = autonomous(alpha).fall_from_rest(0.0, u0, 0.1).unwrap();
        assert!(
            (-hit.v_in - speed).abs() < 1e-9 * speed,
            "alpha {alpha}: {}",
            hit.v_in
        );
        assert_eq!(hit.v_out, -hit.v_in);
        if time.is_finite() {
            assert!(
                (hit.t_hit - time).abs() < 1e-9 * time,
                "alpha {alpha}: {}",
                hit.t_hit
            );
        }
    }
}

#[test]
fn collision_gaps_equal_the_bouncing_period() {
    let osc = autonomous(0.5);
    let v0 = 2.0;
    let traj = osc.simulate(0.0, 0.0, v0, 40.0, Sampling::None).unwrap();
    let tb = period_closed_form_half(-1.0, 0.5 * v0 * v0).unwrap();
    assert!(traj.collisions.len() >= 3);
    let mut last = 0.0;
    for c in &traj.collisions {
        assert!(
            (c.t_hit - last - tb).abs() < 1e-8,
            "{} vs {tb}",
            c.t_hit - last
        );
        assert!((c.v_out - v0).abs() < 1e-9);
        last = c.t_hit;
    }
    // same check off the closed form: a = 1/4 at h = 1/2
    let traj = autonomous(0.25)
        .simulate(0.0, 0.0, 1.0, 30.0, Sampling::None)
        .unwrap();
    let gap = traj.collisions[1].t_hit - traj.collisions[0].t_hit;
    assert!((gap - 11.873006817085375).abs() < 1e-8, "{gap}");
}

#[test]
fn reflection_flips_the_velocity_exactly() {
    let traj = reference()
        .simulate(0.3, 0.0, 3.0, 60.0, Sampling::None)
        .unwrap();
    assert!(traj.collisions.len() > 3);
    for c in &traj.collisions {
        assert_eq!(c.v_out, -c.v_in);
        assert!((c.energy - 0.5 * c.v_in * c.v_in).abs() < 1e-12 * c.energy);
    }
}

#[test]
fn short_horizon_has_no_collision() {
    let traj = autonomous(0.5)
        .simulate(
            0.0,
            9.0,
            0.0,
            1.0,
            Sampling::Grid {
                origin: 0.0,
                dt: 0.25,
            },
        )
        .unwrap();
    assert!(traj.collisions.is_empty());
    let times: Vec<f64> = traj.segments.iter().flatten().map(|s| s.t).collect();
    assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}

#[test]
fn energy_is_conserved_without_forcing_variation() {
    let osc = autonomous(0.25);
    let p = PowerLawPotential::new(0.25, -1.0).unwrap();
    let traj = osc
        .simulate(
            0.0,
            4.0,
            0.5,
            40.0,
            Sampling::Grid {
                origin: 0.0,
                dt: 0.1,
            },
        )
        .unwrap();
    let e0 = 0.125 + p.value(4.0);
    for s in traj.segments.iter().flatten() {
        let e = 0.5 * s.v * s.v + p.value(s.u);
        assert!((e - e0).abs() < 1e-9, "t {}: {e} vs {e0}", s.t);
    }
    assert!(!traj.collisions.is_empty());
}

#[test]
fn closed_orbits_never_collide() {
    // h = V(1) + 0.02 lies below the collision energy of a = 1/2
    let traj = autonomous(0.5)
        .simulate(0.0, 1.0, 0.2, 50.0, Sampling::Steps)
        .unwrap();
    assert!(traj.collisions.is_empty());
    assert!(traj
        .segments
        .iter()
        .flatten()
        .all(|s| s.u > 0.5 && s.u < 1.6));
}

#[test]
fn launch_below_the_guard_is_refused() {
    let osc = reference();
    let gamma = osc.guard().gamma;
    match osc.simulate(0.0, 0.0, 0.9 * gamma, 10.0, Sampling::None) {
        Err(Error::Guard { v, gamma: g }) => {
            assert_eq!(g, gamma);
            assert_eq!(v, 0.9 * gamma);
        }
        other => panic!("expected a guard error, got {other:?}"),
    }
}

#[test]
fn sandwich_bounds_hold_for_several_heights() {
    let osc = reference();
    for u0 in [2.5, 3.0, 6.0] {
        let r = sandwich_check(&osc, u0, 1e-2).unwrap();
        assert!(r.holds(1e-8), "u0 {u0}: {r:?}");
    }
    assert!(matches!(
        sandwich_check(&osc, 0.5 * osc.guard().eta, 1e-2),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn exports_have_stable_headers() {
    let traj = autonomous(0.5)
        .simulate(
            0.0,
            9.0,
            0.0,
            12.0,
            Sampling::Grid {
                origin: 0.0,
                dt: 1.0,
            },
        )
        .unwrap();
    let mut csv = Vec::new();
    write_trajectory_csv(&traj, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("t,u,v,segment_id\n"));
    assert!(csv.lines().last().unwrap().ends_with(",1"));
    let mut log = Vec::new();
    write_collisions_jsonl(&traj, &mut log).unwrap();
    let log = String::from_utf8(log).unwrap();
    assert_eq!(log.lines().count(), 1);
    let event: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert!(event["t_hit"].as_f64().unwrap() > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn collisions_do_not_depend_on_the_handoff_threshold(
        t0 in 0.0f64..TAU,
        v0 in 1.0f64..6.0,
        shrink in 0.05f64..0.9,
    ) {
        let osc = reference();
        let other = osc.with_delta(osc.delta() * shrink).unwrap();
        let a = osc.simulate(t0, 0.0, v0, t0 + 15.0, Sampling::None).unwrap();
        let b = other.simulate(t0, 0.0, v0, t0 + 15.0, Sampling::None).unwrap();
        prop_assert_eq!(a.collisions.len(), b.collisions.len());
        for (x, y) in a.collisions.iter().zip(&b.collisions) {
            prop_assert!((x.t_hit - y.t_hit).abs() < 1e-8);
            prop_assert!((x.v_in - y.v_in).abs() < 1e-8);
        }
    }

    #[test]
    fn time_shift_by_a_forcing_period_commutes(t0 in 0.0f64..TAU, v0 in 1.0f64..6.0) {
        let osc = reference();
        let a = osc.simulate(t0, 0.0, v0, t0 + 12.0, Sampling::None).unwrap();
        let b = osc.simulate(t0 + TAU, 0.0, v0, t0 + TAU + 12.0, Sampling::None).unwrap();
        prop_assert_eq!(a.collisions.len(), b.collisions.len());
        for (x, y) in a.collisions.iter().zip(&b.collisions) {
            prop_assert!((y.t_hit - x.t_hit - TAU).abs() < 1e-9);
            prop_assert!((y.v_in - x.v_in).abs() < 1e-9);
        }
    }
}
