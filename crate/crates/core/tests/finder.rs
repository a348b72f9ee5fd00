//! Periodic bouncing solutions on the reference and autonomous problems.

use std::f64::consts::{PI, TAU};

use bounce_core::finder::{
    admissible_floor, find_orbits, minimal_m, verify_orbit, FinderOptions, SearchBox,
};
use bounce_core::integrator::{Forcing, Harmonic, Oscillator, Sampling};
use bounce_core::period::period_closed_form_half;
use bounce_core::Error;

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
fn reference_problem_has_two_distinct_harmonic_orbits() {
    let osc = reference();
    let out = find_orbits(&osc, 1, 1, None, &FinderOptions::default()).unwrap();
    assert!(out.orbits.len() >= 2, "{} orbits", out.orbits.len());
    for orbit in &out.orbits {
        assert!(orbit.residual < 1e-8);
        assert_eq!(orbit.repeats, 1);
        let report = verify_orbit(&osc, orbit).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.impact_count, 1);

        // an independent reintegration returns to the start one period later
        let p = orbit.section_point;
        let traj = osc
            .simulate(p.t, 0.0, p.v, p.t + TAU + 0.5, Sampling::None)
            .unwrap();
        let next = traj
            .collisions
            .iter()
            .find(|c| c.t_hit > p.t + 1e-6)
            .unwrap();
        assert!((next.t_hit - p.t - TAU).abs() < 1e-7);
        assert!((-next.v_in - p.v).abs() < 1e-7);
    }
    // even forcing: the two solutions launch at t = 0 and t = pi
    let mut angles: Vec<f64> = out.orbits.iter().map(|o| o.section_point.angle()).collect();
    angles.sort_by(f64::total_cmp);
    let near = |a: f64, b: f64| (a - b).abs() < 1e-6 || (a - b).abs() > TAU - 1e-6;
    assert!(
        angles.iter().any(|&a| near(a, 0.0)) && angles.iter().any(|&a| near(a, PI)),
        "{angles:?}"
    );
}

#[test]
fn subharmonic_search_with_two_impacts() {
    let osc = reference();
    let m = minimal_m(&osc, 2).unwrap();
    assert!(m >= 1);
    let out = find_orbits(&osc, m, 2, None, &FinderOptions::default()).unwrap();
    assert!(!out.orbits.is_empty());
    for orbit in &out.orbits {
        let report = verify_orbit(&osc, orbit).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.impact_count, 2);
        assert_eq!(orbit.impact_times.len(), 2);
        assert!(orbit.impact_times.windows(2).all(|w| w[1] > w[0]));
        assert!(orbit.impact_times[1] < orbit.section_point.t + TAU * m as f64);
    }
}

#[test]
fn autonomous_orbits_sit_on_the_resonant_energy() {
    let osc = Oscillator::new(0.5, Forcing::constant(-1.0).unwrap()).unwrap();
    let opts = FinderOptions {
        nt: 8,
        nv: 64,
        ..FinderOptions::default()
    };
    let out = find_orbits(&osc, 2, 1, None, &opts).unwrap();
    assert!(!out.orbits.is_empty());
    for orbit in &out.orbits {
        let v = orbit.section_point.v;
        let tb = period_closed_form_half(-1.0, 0.5 * v * v).unwrap();
        assert!((tb - 4.0 * PI).abs() < 1e-7, "{tb}");
    }
}

#[test]
fn boxes_below_the_admissible_floor_are_refused() {
    let osc = reference();
    let floor = admissible_floor(&osc, 1).unwrap();
    assert!(floor > osc.guard().gamma);
    let search = SearchBox {
        t_min: 0.0,
        t_max: TAU,
        v_min: 0.5 * floor,
        v_max: 5.0,
    };
    let err = find_orbits(&osc, 1, 1, Some(search), &FinderOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Guard { .. }), "{err:?}");
}

#[test]
fn empty_box_yields_no_orbit() {
    let osc = reference();
    let search = SearchBox {
        t_min: 0.0,
        t_max: TAU,
        v_min: 0.7,
        v_max: 0.75,
    };
    let opts = FinderOptions {
        nt: 8,
        nv: 8,
        ..FinderOptions::default()
    };
    let out = find_orbits(&osc, 1, 1, Some(search), &opts).unwrap();
    assert!(out.orbits.is_empty());
}

#[test]
fn records_carry_the_report_fields() {
    let osc = reference();
    let out = find_orbits(&osc, 1, 1, None, &FinderOptions::default()).unwrap();
    let record = out.orbits[0].record();
    let json = serde_json::to_value(&record).unwrap();
    for key in [
        "m",
        "n",
        "t0",
        "v0",
        "impact_times",
        "impact_speeds",
        "residual",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json.as_object().unwrap().len(), 7);
}
