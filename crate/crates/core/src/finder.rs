//! Periodic bouncing solutions as fixed points of `S^n - (2 m pi, 0)`.
//!
//! A coarse scan of the twist profile seeds damped Newton solves of
//! `(Delta_1, Delta_2) = (S_1^n - t0 - 2 m pi, S_2^n - v0) = 0`. Jacobians are
//! central differences and the Newton step uses a pseudo-inverse, so
//! degenerate fixed-point sets (circles in the autonomous case) are handled
//! by a minimum-norm step.

use std::f64::consts::TAU;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{Oscillator, Sampling};
use crate::successor::{
    default_margin, gamma_ladder, linspace_open, logspace, successor_iterate, twist_profile,
    SectionPoint, TwistProfile,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub t_min: f64,
    pub t_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinderOptions {
    pub nt: usize,
    pub nv: usize,
    pub max_newton: usize,
    pub max_backtrack: usize,
    pub step_tol: f64,
    pub residual_tol: f64,
    /// Residual accepted when progress stalls at the integration noise floor.
    pub accept_residual: f64,
    pub dedup_radius: f64,
    pub fd_step: f64,
}

impl Default for FinderOptions {
    fn default() -> Self {
        Self {
            nt: 64,
            nv: 128,
            max_newton: 60,
            max_backtrack: 30,
            step_tol: 1e-12,
            residual_tol: 1e-10,
            accept_residual: 1e-8,
            dedup_radius: 1e-6,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub m: u32,
    pub n: usize,
    pub section_point: SectionPoint,
    /// Launch times of the `n` bounces in `[t0, t0 + 2 m pi)`.
    pub impact_times: Vec<f64>,
    pub impact_speeds: Vec<f64>,
    pub residual: f64,
    /// Orbits sharing a class are iterates of one bouncing solution.
    pub class_id: usize,
    /// How many times a shorter periodic orbit is traversed (1 if primitive).
    pub repeats: usize,
}

/// JSON record `{m, n, t0, v0, impact_times, impact_speeds, residual}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRecord {
    pub m: u32,
    pub n: usize,
    pub t0: f64,
    pub v0: f64,
    pub impact_times: Vec<f64>,
    pub impact_speeds: Vec<f64>,
    pub residual: f64,
}

impl PeriodicOrbit {
    pub fn record(&self) -> OrbitRecord {
        OrbitRecord {
            m: self.m,
            n: self.n,
            t0: self.section_point.t,
            v0: self.section_point.v,
            impact_times: self.impact_times.clone(),
            impact_speeds: self.impact_speeds.clone(),
            residual: self.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discarded {
    pub seed: SectionPoint,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct FinderOutcome {
    pub orbits: Vec<PeriodicOrbit>,
    pub discarded: Vec<Discarded>,
    pub seeds: usize,
    pub search_box: SearchBox,
    /// Scan used for seeding; the diagnostic when no orbit was found.
    pub profile: TwistProfile,
}

/// `(Delta_1, Delta_2)` at `x = (t0, v0)`.
fn discrepancy(osc: &Oscillator, m: u32, n: usize, x: [f64; 2]) -> Result<[f64; 2]> {
    let end = *successor_iterate(osc, SectionPoint::new(x[0], x[1]), n)?
        .last()
        .unwrap();
    Ok([end.t - x[0] - TAU * m as f64, end.v - x[1]])
}

fn max_abs(f: [f64; 2]) -> f64 {
    f[0].abs().max(f[1].abs())
}

/// Lower edge of the admissible speeds for `n` bounces.
pub fn admissible_floor(osc: &Oscillator, n: usize) -> Result<f64> {
    let f = osc.forcing();
    let gamma = osc.guard().gamma;
    let ladder = gamma_ladder(osc.alpha(), f.p1(), f.p2(), n, default_margin(gamma))?;
    Ok(ladder.top())
}

/// Max over `t0` of `S_1^n(t0, v) - t0` on `nt` angles, `None` if undefined.
fn max_advance(osc: &Oscillator, n: usize, v: f64, nt: usize) -> Option<f64> {
    let angles = linspace_open(0.0, TAU, nt);
    let advances: Vec<Option<f64>> = angles
        .par_iter()
        .map(|&t| {
            successor_iterate(osc, SectionPoint::new(t, v), n)
                .ok()
                .map(|p| p[n].t - t)
        })
        .collect();
    advances
        .into_iter()
        .try_fold(f64::NEG_INFINITY, |acc, a| a.map(|a| acc.max(a)))
}

fn min_advance(osc: &Oscillator, n: usize, v: f64, nt: usize) -> Option<f64> {
    let angles = linspace_open(0.0, TAU, nt);
    let advances: Vec<Option<f64>> = angles
        .par_iter()
        .map(|&t| {
            successor_iterate(osc, SectionPoint::new(t, v), n)
                .ok()
                .map(|p| p[n].t - t)
        })
        .collect();
    advances
        .into_iter()
        .try_fold(f64::INFINITY, |acc, a| a.map(|a| acc.min(a)))
}

/// Smallest `m` with `S_1^n(t0, gamma_n + margin) - t0 < 2 m pi` for all `t0`.
pub fn minimal_m(osc: &Oscillator, n: usize) -> Result<u32> {
    let floor = admissible_floor(osc, n)?;
    let advance = max_advance(osc, n, floor, 64)
        .ok_or_else(|| Error::Numerical(format!("iterate undefined at the inner speed {floor}")))?;
    Ok((advance / TAU).floor() as u32 + 1)
}

/// `t0 in [0, 2pi)`, speeds from the ladder top to a speed whose advance
/// exceeds `2 m pi` for every `t0`, widened by half.
pub fn default_search_box(osc: &Oscillator, m: u32, n: usize) -> Result<SearchBox> {
    let v_min = admissible_floor(osc, n)?;
    let target = TAU * m as f64;
    let mut v = 2.0 * v_min.max(0.1);
    for _ in 0..40 {
        match min_advance(osc, n, v, 32) {
            Some(a) if a > target => {
                return Ok(SearchBox {
                    t_min: 0.0,
                    t_max: TAU,
                    v_min,
                    v_max: 1.5 * v,
                });
            }
            _ => v *= 1.5,
        }
    }
    Err(Error::Numerical(format!(
        "no outer twist circle found for m = {m}, n = {n}"
    )))
}

enum NewtonOutcome {
    Converged([f64; 2], f64),
    Discarded(String),
}

fn newton(
    osc: &Oscillator,
    m: u32,
    n: usize,
    seed: [f64; 2],
    opts: &FinderOptions,
) -> NewtonOutcome {
    let gamma = osc.guard().gamma;
    let eval = |x: [f64; 2]| discrepancy(osc, m, n, x);
    let mut x = seed;
    let mut f = match eval(x) {
        Ok(f) => f,
        Err(e) => return NewtonOutcome::Discarded(format!("seed not admissible: {e}")),
    };
    let mut r = max_abs(f);
    for _ in 0..opts.max_newton {
        let ht = opts.fd_step;
        let hv = opts.fd_step * x[1].max(1.0);
        let columns = (|| -> Result<([f64; 2], [f64; 2])> {
            let (fp, fm) = (eval([x[0] + ht, x[1]])?, eval([x[0] - ht, x[1]])?);
            let (gp, gm) = (eval([x[0], x[1] + hv])?, eval([x[0], x[1] - hv])?);
            Ok((
                [(fp[0] - fm[0]) / (2.0 * ht), (fp[1] - fm[1]) / (2.0 * ht)],
                [(gp[0] - gm[0]) / (2.0 * hv), (gp[1] - gm[1]) / (2.0 * hv)],
            ))
        })();
        let (ct, cv) = match columns {
            Ok(c) => c,
            Err(e) => return NewtonOutcome::Discarded(format!("jacobian failed: {e}")),
        };
        let j = Matrix2::new(ct[0], cv[0], ct[1], cv[1]);
        let eps = 1e-10 * j.norm();
        let Ok(pinv) = j.pseudo_inverse(eps) else {
            return NewtonOutcome::Discarded("singular jacobian".into());
        };
        let mut d = -(pinv * Vector2::new(f[0], f[1]));
        // keep single steps local
        let cap = (1.0 / d[0].abs()).min(0.5 * x[1] / d[1].abs()).min(1.0);
        d *= cap;

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtrack {
            let trial = [x[0] + lambda * d[0], x[1] + lambda * d[1]];
            if trial[1] > gamma {
                if let Ok(ft) = eval(trial) {
                    if max_abs(ft) < r {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        let Some((next, fnext)) = accepted else {
            // no decrease: converged to the noise floor or stuck
            return if r < opts.accept_residual {
                NewtonOutcome::Converged(x, r)
            } else {
                NewtonOutcome::Discarded(format!("line search failed at residual {r:e}"))
            };
        };
        let step = (lambda * d.norm()) / x[0].abs().max(x[1]).max(1.0);
        x = next;
        f = fnext;
        r = max_abs(f);
        if r < opts.residual_tol && step < opts.step_tol {
            return NewtonOutcome::Converged(x, r);
        }
    }
    if r < opts.accept_residual {
        NewtonOutcome::Converged(x, r)
    } else {
        NewtonOutcome::Discarded(format!("no convergence, residual {r:e}"))
    }
}

fn wrapped_distance(a: SectionPoint, b: SectionPoint) -> f64 {
    let dt = (a.t - b.t).rem_euclid(TAU);
    dt.min(TAU - dt).max((a.v - b.v).abs())
}

/// Seeds from the scan: points where `Delta_1` changes sign along `v0`, and
/// centers of cells where both discrepancies change sign.
fn seeds(profile: &TwistProfile) -> Vec<SectionPoint> {
    let (nt, nv) = (profile.t0.len(), profile.v0.len());
    let mut out = Vec::new();
    for i in 0..nt {
        for j in 0..nv.saturating_sub(1) {
            let (Some(a), Some(b)) = (profile.delta(i, j), profile.delta(i, j + 1)) else {
                continue;
            };
            if a.signum() != b.signum() {
                // linear interpolation of the zero along v
                let s = a / (a - b);
                let v = profile.v0[j] + s * (profile.v0[j + 1] - profile.v0[j]);
                out.push(SectionPoint::new(profile.t0[i], v));
            }
        }
    }
    let sign_change = |vals: &[Option<f64>]| -> bool {
        let vals: Option<Vec<f64>> = vals.iter().copied().collect();
        match vals {
            Some(v) => v.iter().any(|x| *x > 0.0) && v.iter().any(|x| *x < 0.0),
            None => false,
        }
    };
    // Delta is 2pi-periodic in t0, so a full circle also wraps across the seam
    let full_circle = nt > 1
        && profile.t0[nt - 1] - profile.t0[0] + (profile.t0[1] - profile.t0[0]) >= TAU - 1e-12;
    let columns = if full_circle {
        nt
    } else {
        nt.saturating_sub(1)
    };
    for i in 0..columns {
        let i2 = (i + 1) % nt;
        let t_hi = if i + 1 < nt {
            profile.t0[i + 1]
        } else {
            profile.t0[0] + TAU
        };
        for j in 0..nv.saturating_sub(1) {
            let corners = [(i, j), (i2, j), (i, j + 1), (i2, j + 1)];
            let d1: Vec<Option<f64>> = corners.iter().map(|&(a, b)| profile.delta(a, b)).collect();
            let d2: Vec<Option<f64>> = corners.iter().map(|&(a, b)| profile.radial(a, b)).collect();
            if sign_change(&d1) && sign_change(&d2) {
                out.push(SectionPoint::new(
                    0.5 * (profile.t0[i] + t_hi),
                    0.5 * (profile.v0[j] + profile.v0[j + 1]),
                ));
            }
        }
    }
    out
}

/// All fixed points of `S^n - (2 m pi, 0)` seeded from a scan of the box.
pub fn find_orbits(
    osc: &Oscillator,
    m: u32,
    n: usize,
    search_box: Option<SearchBox>,
    opts: &FinderOptions,
) -> Result<FinderOutcome> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} and n = {n} must be positive"
        )));
    }
    let floor = admissible_floor(osc, n)?;
    let sb = match search_box {
        Some(sb) => {
            if !(sb.v_min > 0.0 && sb.v_max > sb.v_min && sb.t_max > sb.t_min) {
                return Err(Error::InvalidParameter(format!("empty search box {sb:?}")));
            }
            if !(sb.v_min >= floor) {
                return Err(Error::Guard {
                    v: sb.v_min,
                    gamma: floor,
                });
            }
            sb
        }
        None => default_search_box(osc, m, n)?,
    };
    let t_grid = linspace_open(sb.t_min, sb.t_max, opts.nt);
    let v_grid = logspace(sb.v_min, sb.v_max, opts.nv);
    let profile = twist_profile(osc, &t_grid, &v_grid, n, m);
    let seeds = seeds(&profile);

    let results: Vec<(SectionPoint, NewtonOutcome)> = seeds
        .par_iter()
        .map(|&s| (s, newton(osc, m, n, [s.t, s.v], opts)))
        .collect();

    let mut roots: Vec<(SectionPoint, f64)> = Vec::new();
    let mut discarded = Vec::new();
    for (seed, outcome) in results {
        match outcome {
            NewtonOutcome::Converged(x, r) => {
                let p = SectionPoint::new(x[0].rem_euclid(TAU), x[1]);
                match roots
                    .iter_mut()
                    .find(|(q, _)| wrapped_distance(*q, p) < opts.dedup_radius)
                {
                    Some(existing) => {
                        if r < existing.1 {
                            *existing = (p, r);
                        }
                    }
                    None => roots.push((p, r)),
                }
            }
            NewtonOutcome::Discarded(reason) => discarded.push(Discarded { seed, reason }),
        }
    }

    let mut orbits = Vec::with_capacity(roots.len());
    for (p, _) in roots {
        match build_orbit(osc, m, n, p) {
            Ok(o) => orbits.push(o),
            Err(e) => discarded.push(Discarded {
                seed: p,
                reason: format!("root not reproducible: {e}"),
            }),
        }
    }
    orbits.sort_by(|a, b| {
        (a.section_point.t, a.section_point.v)
            .partial_cmp(&(b.section_point.t, b.section_point.v))
            .unwrap()
    });
    tag_classes(&mut orbits, opts.dedup_radius.max(1e-6) * 10.0);
    Ok(FinderOutcome {
        orbits,
        discarded,
        seeds: seeds.len(),
        search_box: sb,
        profile,
    })
}

fn build_orbit(osc: &Oscillator, m: u32, n: usize, p: SectionPoint) -> Result<PeriodicOrbit> {
    let points = successor_iterate(osc, p, n)?;
    let end = points[n];
    let residual = max_abs([end.t - p.t - TAU * m as f64, end.v - p.v]);
    Ok(PeriodicOrbit {
        m,
        n,
        section_point: p,
        impact_times: points[..n].iter().map(|q| q.t).collect(),
        impact_speeds: points[..n].iter().map(|q| q.v).collect(),
        residual,
        class_id: 0,
        repeats: repeats(&points, 1e-6),
    })
}

/// Largest `r` dividing `n` with `S^(n/r)(p) = p` modulo the lift.
fn repeats(points: &[SectionPoint], tol: f64) -> usize {
    let n = points.len() - 1;
    (1..n)
        .filter(|&k| n.is_multiple_of(k))
        .find(|&k| {
            let shift = (points[k].t - points[0].t) / TAU;
            (shift - shift.round()).abs() * TAU < tol && (points[k].v - points[0].v).abs() < tol
        })
        .map_or(1, |k| n / k)
}

/// Orbits whose section point is an iterate of another orbit's section point
/// (modulo `2pi`) share the smaller index as class.
fn tag_classes(orbits: &mut [PeriodicOrbit], tol: f64) {
    for i in 0..orbits.len() {
        orbits[i].class_id = i;
        for j in 0..i {
            let other = &orbits[j];
            let same = other
                .impact_times
                .iter()
                .zip(&other.impact_speeds)
                .any(|(&t, &v)| {
                    wrapped_distance(SectionPoint::new(t, v), orbits[i].section_point) < tol
                });
            if same {
                orbits[i].class_id = orbits[j].class_id;
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    /// Launch at `t0` plus collisions inside the period window.
    pub impact_count: usize,
    /// Sup-norm of `(u, v)(t + 2 m pi) - (u, v)(t)` over classical samples.
    pub periodicity_error: f64,
    /// Distance between the collision closing the window and `(t0 + 2 m pi, v0)`.
    pub closure_error: f64,
    pub reflection_error: f64,
    pub compared_samples: usize,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Reintegrates two periods and checks impact count, periodicity and
/// reflection.
pub fn verify_orbit(osc: &Oscillator, orbit: &PeriodicOrbit) -> Result<VerifyReport> {
    let period = TAU * orbit.m as f64;
    let p = orbit.section_point;
    let per_period = 1000 * orbit.m as usize;
    let dt = period / per_period as f64;
    let window_tol = 1e-6;
    let traj = osc.continue_bouncing(
        p.t,
        p.v,
        p.t + 2.0 * period + 0.5 * dt,
        Sampling::Grid { origin: p.t, dt },
    )?;

    let inside = traj
        .collisions
        .iter()
        .filter(|c| c.t_hit < p.t + period - window_tol)
        .count();
    let impact_count = 1 + inside;
    let closure_error = traj
        .collisions
        .iter()
        .map(|c| (c.t_hit - p.t - period).abs().max((c.v_out - p.v).abs()))
        .fold(f64::INFINITY, f64::min);
    let reflection_error = traj
        .collisions
        .iter()
        .map(|c| (c.v_out + c.v_in).abs() / c.v_in.abs())
        .fold(0.0, f64::max);

    // grid samples indexed by k with t = t0 + k dt
    let mut by_index: std::collections::BTreeMap<i64, (f64, f64)> = Default::default();
    for seg in &traj.segments {
        for s in seg {
            let k = ((s.t - p.t) / dt).round() as i64;
            if (s.t - (p.t + k as f64 * dt)).abs() < 1e-9 * dt && s.u >= osc.delta() {
                by_index.insert(k, (s.u, s.v));
            }
        }
    }
    let mut periodicity_error: f64 = 0.0;
    let mut compared = 0;
    for (&k, &(u, v)) in by_index.range(0..per_period as i64) {
        if let Some(&(u2, v2)) = by_index.get(&(k + per_period as i64)) {
            periodicity_error = periodicity_error.max((u2 - u).abs()).max((v2 - v).abs());
            compared += 1;
        }
    }

    let mut failures = Vec::new();
    if impact_count != orbit.n {
        failures.push(format!(
            "impact count {impact_count} differs from n = {}",
            orbit.n
        ));
    }
    if !(periodicity_error < 1e-6) || compared == 0 {
        failures.push(format!(
            "periodicity error {periodicity_error:e} over {compared} samples"
        ));
    }
    let closure_limit = 10.0 * orbit.residual + 1e-12;
    if !(closure_error <= closure_limit) {
        failures.push(format!(
            "closure error {closure_error:e} exceeds {closure_limit:e}"
        ));
    }
    if !(reflection_error < 1e-10) {
        failures.push(format!("reflection error {reflection_error:e}"));
    }
    if !traj.regime_changes.is_empty() {
        failures.push(format!(
            "{} arcs failed to reach the wall",
            traj.regime_changes.len()
        ));
    }
    Ok(VerifyReport {
        impact_count,
        periodicity_error,
        closure_error,
        reflection_error,
        compared_samples: compared,
        failures,
    })
}
