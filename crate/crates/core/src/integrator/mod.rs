//! Bouncing solutions of `u'' - u^(-a) = p(t)`.
//!
//! Away from the wall the first-order system `u' = v, v' = u^(-a) + p(t)` is
//! integrated in time. Below the handoff threshold `delta` the solution is
//! continued in the position-energy variables, with `u` as the independent
//! variable and `w = v^2/2 - u^q/q` (`q = 1 - a`):
//!
//! `dt/du = +-1 / sqrt(2 (w + u^q/q))`, `dw/du = p(t)`.
//!
//! This system reaches `u = 0` in finite `u`-length, so collision times and
//! speeds come out of an ordinary integration. Its right-hand side is only
//! Hoelder continuous in `u` at the wall; the adaptive stepper resolves this by
//! shrinking its steps geometrically.
//!
//! Every integration runs on a local clock `tau = t - t_start` with the forcing
//! evaluated at `t_start mod 2pi + tau`, so accuracy does not degrade with the
//! absolute size of `t`.

pub mod dop853;
pub mod forcing;

use std::f64::consts::TAU;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::potential::{gamma_threshold, CollisionGuard};
use crate::roots::safeguarded_newton;
use dop853::{Dop853, State, StepperConfig, Tolerances};
pub use forcing::{Forcing, ForcingSpec, Harmonic};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub tol: Tolerances,
    /// Handoff threshold; `None` selects `min(u_c(p1), eta) / 100`.
    pub delta: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            delta: None,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

/// Which points of a classical arc are recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// Endpoints only.
    None,
    /// Every accepted step.
    Steps,
    /// Times `origin + k * dt` from dense output, plus the endpoints.
    Grid { origin: f64, dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalExit {
    /// `u` reached `delta` moving inward.
    ApproachingCollision,
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSegment {
    pub samples: Vec<Sample>,
    pub end: Sample,
    pub exit: ClassicalExit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Incoming,
    Outgoing,
}

/// Result of a crossing of `[0, delta]` in the position-energy variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub t_end: f64,
    /// `w` at the far end (`u = 0` incoming, `u = delta` outgoing).
    pub w_end: f64,
    /// Velocity at the far end; negative for incoming crossings.
    pub v_end: f64,
    /// Accepted step nodes, ordered in time.
    pub nodes: Vec<Sample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub t_hit: f64,
    pub v_in: f64,
    pub v_out: f64,
    pub energy: f64,
}

/// An arc reached `delta` inward but turned back before the wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeChange {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BounceTrajectory {
    pub t_start: f64,
    pub t_end: f64,
    /// Classical arcs between collisions; segment `i` ends at collision `i`.
    pub segments: Vec<Vec<Sample>>,
    pub collisions: Vec<CollisionEvent>,
    pub regime_changes: Vec<RegimeChange>,
}

/// The forced oscillator together with its collision guard and numerics.
#[derive(Debug, Clone)]
pub struct Oscillator {
    alpha: f64,
    forcing: Forcing,
    guard: CollisionGuard,
    delta: f64,
    opts: IntegratorOptions,
}

impl Oscillator {
    pub fn new(alpha: f64, forcing: Forcing) -> Result<Self> {
        Self::with_options(alpha, forcing, IntegratorOptions::default())
    }

    pub fn with_options(alpha: f64, forcing: Forcing, opts: IntegratorOptions) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} must lie in (0, 1)"
            )));
        }
        let guard = gamma_threshold(alpha, forcing.p1(), forcing.p2())?;
        let delta = match opts.delta {
            Some(d) if d > 0.0 && d.is_finite() => d,
            Some(d) => {
                return Err(Error::InvalidParameter(format!(
                    "handoff threshold delta = {d}"
                )))
            }
            None => default_delta(alpha, forcing.p1()),
        };
        if !(opts.tol.rtol > 0.0 && opts.tol.atol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances {:?}",
                opts.tol
            )));
        }
        Ok(Self {
            alpha,
            forcing,
            guard,
            delta,
            opts,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn guard(&self) -> CollisionGuard {
        self.guard
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn options(&self) -> IntegratorOptions {
        self.opts
    }

    /// Same oscillator with a different handoff threshold.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::with_options(
            self.alpha,
            self.forcing.clone(),
            IntegratorOptions {
                delta: Some(delta),
                ..self.opts
            },
        )
    }

    /// Same oscillator with different tolerances.
    pub fn with_tolerances(&self, tol: Tolerances) -> Result<Self> {
        Self::with_options(
            self.alpha,
            self.forcing.clone(),
            IntegratorOptions {
                tol,
                delta: Some(self.delta),
                ..self.opts
            },
        )
    }

    /// The oscillator driven by `p(-t)`; its solutions are `u(-t)`.
    pub fn reversed(&self) -> Self {
        Self {
            forcing: self.forcing.reversed(),
            ..self.clone()
        }
    }

    fn q(&self) -> f64 {
        1.0 - self.alpha
    }

    /// Singular part of the potential, `-u^q / q`.
    pub fn singular_potential(&self, u: f64) -> f64 {
        let q = self.q();
        -u.powf(q) / q
    }

    fn stepper_config(&self, h_max: f64) -> StepperConfig {
        StepperConfig {
            tol: self.opts.tol,
            h_max,
            max_steps: self.opts.max_steps,
        }
    }

    /// Integrates the classical system from `(t0, u0, v0)` until `u` falls to
    /// `delta` or `t_max` is reached.
    pub fn integrate_classical(
        &self,
        t0: f64,
        u0: f64,
        v0: f64,
        t_max: f64,
        sampling: Sampling,
    ) -> Result<ClassicalSegment> {
        if !(u0 > 0.0) || !u0.is_finite() {
            return Err(Error::Domain(u0));
        }
        if !v0.is_finite() || !(t_max > t0) {
            return Err(Error::Input(format!(
                "classical arc from t = {t0}, v = {v0} to {t_max}"
            )));
        }
        let phase = t0.rem_euclid(TAU);
        let alpha = self.alpha;
        let forcing = &self.forcing;
        let rhs = move |tau: f64, y: &State<2>| -> State<2> {
            let u = y[0];
            if u > 0.0 {
                [y[1], u.powf(-alpha) + forcing.eval(phase + tau)]
            } else {
                [f64::NAN, f64::NAN]
            }
        };
        let tau_max = t_max - t0;
        let mut stepper = Dop853::new(rhs, 0.0, [u0, v0], 1.0, self.stepper_config(f64::INFINITY))?;
        let start = Sample {
            t: t0,
            u: u0,
            v: v0,
        };
        let mut samples = vec![start];
        let mut armed = u0 > self.delta;
        let mut next_grid = match sampling {
            Sampling::Grid { origin, dt } if dt > 0.0 => ((t0 - origin) / dt).floor() as i64 + 1,
            Sampling::Grid { dt, .. } => {
                return Err(Error::InvalidParameter(format!("sampling interval {dt}")))
            }
            _ => 0,
        };
        let stiff = |stepper_x: f64, y: &State<2>| Error::Stiffness {
            t: t0 + stepper_x,
            u: y[0],
            v: y[1],
        };

        loop {
            let (tau_a, y_a) = (stepper.x(), *stepper.y());
            if let Err(e) = stepper.step(tau_max) {
                return Err(match e {
                    Error::Numerical(_) => stiff(tau_a, &y_a),
                    other => other,
                });
            }
            let (tau_b, y_b) = (stepper.x(), *stepper.y());
            let event = armed && y_b[0] <= self.delta;
            let (tau_end, y_end) = if event {
                stepper.prepare_dense()?;
                let tau_star = self.locate_delta(&stepper, tau_a, tau_b)?;
                (
                    tau_star,
                    [self.delta, y_end_velocity(&stepper, tau_star, self.delta)?],
                )
            } else {
                (tau_b, y_b)
            };

            match sampling {
                Sampling::Grid { origin, dt } => {
                    let mut prepared = event;
                    loop {
                        let tg = origin + next_grid as f64 * dt;
                        let tau_g = tg - t0;
                        if tau_g >= tau_end {
                            break;
                        }
                        if !prepared {
                            stepper.prepare_dense()?;
                            prepared = true;
                        }
                        let y = stepper.dense_at(tau_g)?;
                        samples.push(Sample {
                            t: tg,
                            u: y[0],
                            v: y[1],
                        });
                        next_grid += 1;
                    }
                }
                Sampling::Steps if !event && tau_b < tau_max => {
                    samples.push(Sample {
                        t: t0 + tau_b,
                        u: y_b[0],
                        v: y_b[1],
                    });
                }
                _ => {}
            }

            if event {
                let end = Sample {
                    t: t0 + tau_end,
                    u: y_end[0],
                    v: y_end[1],
                };
                samples.push(end);
                return Ok(ClassicalSegment {
                    samples,
                    end,
                    exit: ClassicalExit::ApproachingCollision,
                });
            }
            if tau_b >= tau_max {
                let end = Sample {
                    t: t_max,
                    u: y_b[0],
                    v: y_b[1],
                };
                samples.push(end);
                return Ok(ClassicalSegment {
                    samples,
                    end,
                    exit: ClassicalExit::Timeout,
                });
            }
            armed = armed || y_b[0] > self.delta;
        }
    }

    /// Time in the last step at which `u = delta`: bracketed Newton on the dense
    /// output, then Newton on full Runge-Kutta re-steps from the step start.
    fn locate_delta<F>(&self, stepper: &Dop853<F, 2>, tau_a: f64, tau_b: f64) -> Result<f64>
    where
        F: Fn(f64, &State<2>) -> State<2>,
    {
        let delta = self.delta;
        let dense = |tau: f64| -> (f64, f64) {
            let y = stepper.dense_at(tau).unwrap_or([f64::NAN, f64::NAN]);
            (y[0] - delta, y[1])
        };
        let mut tau = safeguarded_newton(dense, tau_a, tau_b, 100)?;
        for _ in 0..3 {
            let Some(y) = stepper.restep(tau - tau_a) else {
                break;
            };
            let correction = (y[0] - delta) / y[1];
            if !correction.is_finite() {
                break;
            }
            tau -= correction;
            if correction.abs() <= 1e-15 * tau.abs().max(1.0) {
                break;
            }
        }
        Ok(tau.clamp(tau_a, tau_b))
    }

    /// Crosses `[0, delta]` in the position-energy variables.
    ///
    /// Incoming: starts at `u = delta` at time `t_start` with energy `w_start`
    /// and stops at the wall. Outgoing: starts at the wall and stops at
    /// `u = delta`. An incoming crossing whose speed vanishes before the wall
    /// fails with [`Error::NoCollision`].
    pub fn cross_collision(
        &self,
        t_start: f64,
        w_start: f64,
        direction: Direction,
    ) -> Result<Crossing> {
        let delta = self.delta;
        let q = self.q();
        let phase = t_start.rem_euclid(TAU);
        let forcing = &self.forcing;
        let sign = match direction {
            Direction::Incoming => -1.0,
            Direction::Outgoing => 1.0,
        };
        let kinetic = |u: f64, w: f64| 2.0 * (w + u.powf(q) / q);
        let rhs = move |u: f64, y: &State<2>| -> State<2> {
            let k = 2.0 * (y[1] + u.powf(q) / q);
            if u >= 0.0 && k > 0.0 {
                [sign / k.sqrt(), forcing.eval(phase + y[0])]
            } else {
                [f64::NAN, f64::NAN]
            }
        };
        let (u0, u1, dir) = match direction {
            Direction::Incoming => (delta, 0.0, -1.0),
            Direction::Outgoing => (0.0, delta, 1.0),
        };
        if !(kinetic(u0, w_start) > 0.0) {
            return Err(match direction {
                Direction::Incoming => Error::NoCollision { t: t_start },
                Direction::Outgoing => Error::Numerical(format!(
                    "outgoing crossing at t = {t_start} with energy {w_start}"
                )),
            });
        }
        // the short wall crossing is cheap; run it 100x tighter than the arcs
        let mut cfg = self.stepper_config(delta);
        cfg.tol = Tolerances {
            rtol: cfg.tol.rtol * 1e-2,
            atol: cfg.tol.atol * 1e-2,
        };
        let mut stepper = Dop853::new(rhs, u0, [0.0, w_start], dir, cfg)?;
        let velocity = |u: f64, w: f64| sign * kinetic(u, w).max(0.0).sqrt();
        let mut nodes = vec![Sample {
            t: t_start,
            u: u0,
            v: velocity(u0, w_start),
        }];
        while stepper.x() != u1 {
            if let Err(e) = stepper.step(u1) {
                let y = stepper.y();
                return Err(match (direction, e) {
                    (Direction::Incoming, Error::Numerical(_)) => {
                        Error::NoCollision { t: t_start + y[0] }
                    }
                    (_, e) => e,
                });
            }
            let (u, y) = (stepper.x(), stepper.y());
            nodes.push(Sample {
                t: t_start + y[0],
                u,
                v: velocity(u, y[1]),
            });
        }
        let y = *stepper.y();
        let end = *nodes.last().unwrap();
        Ok(Crossing {
            t_end: t_start + y[0],
            w_end: y[1],
            v_end: end.v,
            nodes,
        })
    }

    /// Bouncing solution launched from the wall at `t0` with speed `v0`.
    pub fn continue_bouncing(
        &self,
        t0: f64,
        v0: f64,
        t_end: f64,
        sampling: Sampling,
    ) -> Result<BounceTrajectory> {
        let gamma = self.guard.gamma;
        if !(v0 > gamma) {
            return Err(Error::Guard { v: v0, gamma });
        }
        self.run(
            Phase::Launch {
                t: t0,
                w: 0.5 * v0 * v0,
            },
            t0,
            t_end,
            sampling,
        )
    }

    /// Bouncing solution from arbitrary data: a wall launch when `u0 = 0`
    /// (guarded as in [`Oscillator::continue_bouncing`]), a classical arc
    /// otherwise.
    pub fn simulate(
        &self,
        t0: f64,
        u0: f64,
        v0: f64,
        t_end: f64,
        sampling: Sampling,
    ) -> Result<BounceTrajectory> {
        if u0 == 0.0 {
            return self.continue_bouncing(t0, v0, t_end, sampling);
        }
        if !(u0 > 0.0) || !u0.is_finite() {
            return Err(Error::Domain(u0));
        }
        self.run(
            Phase::Arc {
                t: t0,
                u: u0,
                v: v0,
            },
            t0,
            t_end,
            sampling,
        )
    }

    fn run(
        &self,
        start: Phase,
        t0: f64,
        t_end: f64,
        sampling: Sampling,
    ) -> Result<BounceTrajectory> {
        if !(t_end > t0) {
            return Err(Error::Input(format!("empty time span [{t0}, {t_end}]")));
        }
        let mut traj = BounceTrajectory {
            t_start: t0,
            t_end,
            segments: vec![Vec::new()],
            collisions: Vec::new(),
            regime_changes: Vec::new(),
        };
        let mut phase = start;
        if let Phase::Arc { t, u, v } = phase {
            traj.segments[0].push(Sample { t, u, v });
        }
        loop {
            let segment = traj.segments.last_mut().unwrap();
            match phase {
                Phase::Launch { t, w } => {
                    let c = self.cross_collision(t, w, Direction::Outgoing)?;
                    let done = push_until(segment, &c.nodes[1..], t_end);
                    if done {
                        return Ok(traj);
                    }
                    phase = Phase::Arc {
                        t: c.t_end,
                        u: self.delta,
                        v: c.v_end,
                    };
                }
                Phase::Arc { t, u, v } => {
                    let arc = self.integrate_classical(t, u, v, t_end, sampling)?;
                    segment.extend_from_slice(&arc.samples[1..]);
                    match arc.exit {
                        ClassicalExit::Timeout => return Ok(traj),
                        ClassicalExit::ApproachingCollision => {
                            phase = Phase::Approach {
                                t: arc.end.t,
                                v: arc.end.v,
                            }
                        }
                    }
                }
                Phase::Approach { t, v } => {
                    let w = 0.5 * v * v + self.singular_potential(self.delta);
                    match self.cross_collision(t, w, Direction::Incoming) {
                        Ok(c) => {
                            let interior = &c.nodes[1..c.nodes.len() - 1];
                            if push_until(segment, interior, t_end) || c.t_end > t_end {
                                return Ok(traj);
                            }
                            let speed = (2.0 * c.w_end).sqrt();
                            traj.collisions.push(CollisionEvent {
                                t_hit: c.t_end,
                                v_in: -speed,
                                v_out: speed,
                                energy: c.w_end,
                            });
                            traj.segments.push(Vec::new());
                            phase = Phase::Launch {
                                t: c.t_end,
                                w: c.w_end,
                            };
                        }
                        Err(Error::NoCollision { .. }) => {
                            traj.regime_changes.push(RegimeChange {
                                t,
                                u: self.delta,
                                v,
                            });
                            phase = Phase::Arc {
                                t,
                                u: self.delta,
                                v,
                            };
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }

    /// Fall from rest at `u0` until the first collision: collision time and
    /// velocity, plus the grid samples of the classical part.
    pub fn fall_from_rest(
        &self,
        t0: f64,
        u0: f64,
        dt: f64,
    ) -> Result<(CollisionEvent, Vec<Sample>)> {
        let horizon = t0 + 100.0 + 10.0 * u0.sqrt();
        let arc =
            self.integrate_classical(t0, u0, 0.0, horizon, Sampling::Grid { origin: t0, dt })?;
        if arc.exit != ClassicalExit::ApproachingCollision {
            return Err(Error::NoCollision { t: arc.end.t });
        }
        let w = 0.5 * arc.end.v * arc.end.v + self.singular_potential(self.delta);
        let c = self.cross_collision(arc.end.t, w, Direction::Incoming)?;
        let speed = (2.0 * c.w_end).sqrt();
        let event = CollisionEvent {
            t_hit: c.t_end,
            v_in: -speed,
            v_out: speed,
            energy: c.w_end,
        };
        let mut samples = arc.samples;
        samples.pop();
        samples.remove(0);
        Ok((event, samples))
    }
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    Launch { t: f64, w: f64 },
    Arc { t: f64, u: f64, v: f64 },
    Approach { t: f64, v: f64 },
}

fn y_end_velocity<F>(stepper: &Dop853<F, 2>, tau: f64, delta: f64) -> Result<f64>
where
    F: Fn(f64, &State<2>) -> State<2>,
{
    let (tau_a, _) = stepper
        .previous()
        .ok_or_else(|| Error::Numerical("no step taken".into()))?;
    let y = match stepper.restep(tau - tau_a) {
        Some(y) if tau > tau_a => y,
        _ => stepper.dense_at(tau)?,
    };
    debug_assert!((y[0] - delta).abs() < 1e-6 * delta.max(1.0));
    Ok(y[1])
}

/// Appends samples with `t <= t_end`; reports whether `t_end` was passed.
fn push_until(segment: &mut Vec<Sample>, nodes: &[Sample], t_end: f64) -> bool {
    for s in nodes {
        if s.t > t_end {
            return true;
        }
        segment.push(*s);
    }
    false
}

/// `min(u_c(p1), eta) / 100`; `eta > u_c` always, so this is `u_c(p1) / 100`.
pub fn default_delta(alpha: f64, p1: f64) -> f64 {
    let center = (-p1).powf(-1.0 / alpha);
    let eta = ((alpha - 1.0) * p1).powf(-1.0 / alpha);
    center.min(eta) / 100.0
}

/// Comparison of a forced fall with the falls under `p = p1` and `p = p2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub u0: f64,
    /// Forward collision times `(t12, t1, t11)`.
    pub forward_times: [f64; 3],
    /// Backward collision times `(t01, t0, t02)`.
    pub backward_times: [f64; 3],
    /// Forward collision velocities of `(u1, u, u2)`.
    pub forward_velocities: [f64; 3],
    /// `max(u - u1)` over common grid times in both directions.
    pub upper_violation: f64,
    /// `max(u2 - u)` over common grid times in both directions.
    pub lower_violation: f64,
    pub compared_points: usize,
}

impl SandwichReport {
    pub fn positions_hold(&self, slack: f64) -> bool {
        self.upper_violation <= slack && self.lower_violation <= slack
    }

    /// `t01 <= t0 <= t02 < 0 < t12 <= t1 <= t11`.
    pub fn times_hold(&self, slack: f64) -> bool {
        let [t12, t1, t11] = self.forward_times;
        let [t01, t0, t02] = self.backward_times;
        t01 <= t0 + slack
            && t0 <= t02 + slack
            && t02 < 0.0
            && 0.0 < t12
            && t12 <= t1 + slack
            && t1 <= t11 + slack
    }

    /// `|u1'(t11)| <= |u'(t1)| <= |u2'(t12)|`.
    pub fn velocities_hold(&self, slack: f64) -> bool {
        let [v1, v, v2] = self.forward_velocities.map(f64::abs);
        v1 <= v + slack && v <= v2 + slack
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.positions_hold(slack) && self.times_hold(slack) && self.velocities_hold(slack)
    }
}

/// Falls from rest at `u0 > eta` at `t = 0`, forward and backward in time,
/// under the forcing and under its two constant bounds.
pub fn sandwich_check(osc: &Oscillator, u0: f64, dt: f64) -> Result<SandwichReport> {
    let eta = osc.guard().eta;
    if !(u0 > eta) {
        return Err(Error::InvalidParameter(format!(
            "start u0 = {u0} must exceed eta = {eta}"
        )));
    }
    let f = osc.forcing();
    let opts = IntegratorOptions {
        delta: Some(osc.delta()),
        ..osc.options()
    };
    let upper = Oscillator::with_options(osc.alpha(), Forcing::constant(f.p1())?, opts)?;
    let lower = Oscillator::with_options(osc.alpha(), Forcing::constant(f.p2())?, opts)?;

    let (e, s) = osc.fall_from_rest(0.0, u0, dt)?;
    let (e1, s1) = upper.fall_from_rest(0.0, u0, dt)?;
    let (e2, s2) = lower.fall_from_rest(0.0, u0, dt)?;
    let (b, sb) = osc.reversed().fall_from_rest(0.0, u0, dt)?;
    // constant forcing is time symmetric
    let (b1, b2) = (e1, e2);

    let mut upper_violation = f64::NEG_INFINITY;
    let mut lower_violation = f64::NEG_INFINITY;
    let mut compared = 0;
    for forced in [&s, &sb] {
        let n = forced.len().min(s1.len()).min(s2.len());
        for i in 0..n {
            debug_assert!(
                (forced[i].t - s1[i].t).abs() < 1e-9 && (forced[i].t - s2[i].t).abs() < 1e-9
            );
            upper_violation = upper_violation.max(forced[i].u - s1[i].u);
            lower_violation = lower_violation.max(s2[i].u - forced[i].u);
            compared += 1;
        }
    }
    Ok(SandwichReport {
        u0,
        forward_times: [e2.t_hit, e.t_hit, e1.t_hit],
        backward_times: [-b1.t_hit, -b.t_hit, -b2.t_hit],
        forward_velocities: [e1.v_in, e.v_in, e2.v_in],
        upper_violation,
        lower_violation,
        compared_points: compared,
    })
}

/// CSV with header `t,u,v,segment_id`.
pub fn write_trajectory_csv<W: Write>(traj: &BounceTrajectory, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,u,v,segment_id")?;
    for (id, seg) in traj.segments.iter().enumerate() {
        for s in seg {
            writeln!(
                out,
                "{},{},{},{id}",
                fmt_f64(s.t),
                fmt_f64(s.u),
                fmt_f64(s.v)
            )?;
        }
    }
    Ok(())
}

/// One JSON object per collision: `{t_hit, v_in, v_out, energy}`.
pub fn write_collisions_jsonl<W: Write>(
    traj: &BounceTrajectory,
    mut out: W,
) -> std::io::Result<()> {
    for c in &traj.collisions {
        serde_json::to_writer(&mut out, c)?;
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(alpha: f64) -> Oscillator {
        Oscillator::new(alpha, Forcing::constant(-1.0).unwrap()).unwrap()
    }

    #[test]
    fn default_delta_is_a_hundredth_of_the_center() {
        assert!((default_delta(0.5, -1.0) - 0.01).abs() < 1e-16);
        assert!((unit(0.5).delta() - 0.01).abs() < 1e-16);
    }

    #[test]
    fn equilibrium_stays_put() {
        let seg = unit(0.5)
            .integrate_classical(0.0, 1.0, 0.0, 50.0, Sampling::Steps)
            .unwrap();
        assert_eq!(seg.exit, ClassicalExit::Timeout);
        for s in &seg.samples {
            assert!((s.u - 1.0).abs() < 1e-12 && s.v.abs() < 1e-12);
        }
    }

    #[test]
    fn fall_from_nine_hits_with_speed_root_six() {
        // V(9) = 9 - 2*3 = 3, so the wall is reached with v^2/2 = 3
        let (e, _) = unit(0.5).fall_from_rest(0.0, 9.0, 0.1).unwrap();
        assert!((e.v_in + 6f64.sqrt()).abs() < 1e-9, "{}", e.v_in);
        assert_eq!(e.v_out, -e.v_in);
    }

    #[test]
    fn outgoing_crossing_starts_with_wall_speed() {
        let osc = unit(0.5);
        let c = osc.cross_collision(0.0, 1.0, Direction::Outgoing).unwrap();
        assert!((c.nodes[0].v - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.nodes.last().unwrap().u, osc.delta());
    }

    #[test]
    fn crossing_is_time_reversible_under_constant_forcing() {
        let osc = unit(0.5);
        let v = -2.0;
        let w = 0.5 * v * v + osc.singular_potential(osc.delta());
        let inc = osc.cross_collision(1.0, w, Direction::Incoming).unwrap();
        let out = osc
            .cross_collision(inc.t_end, inc.w_end, Direction::Outgoing)
            .unwrap();
        assert!((out.v_end + v).abs() < 1e-12, "{}", out.v_end);
        let skew = (out.t_end - inc.t_end) - (inc.t_end - 1.0);
        assert!(skew.abs() < 1e-12, "{skew:e} {}", inc.t_end - 1.0);
    }

    #[test]
    fn slow_approach_turns_back_before_the_wall() {
        let osc = unit(0.5);
        let v = -0.01;
        let w = 0.5 * v * v + osc.singular_potential(osc.delta());
        assert!(matches!(
            osc.cross_collision(0.0, w, Direction::Incoming),
            Err(Error::NoCollision { .. })
        ));
    }

    #[test]
    fn guard_is_enforced() {
        let f = Forcing::new(
            -2.0,
            vec![Harmonic {
                k: 1,
                a: 0.1,
                b: 0.0,
            }],
        )
        .unwrap();
        let osc = Oscillator::new(0.5, f).unwrap();
        assert!(matches!(
            osc.continue_bouncing(0.0, 0.5, 10.0, Sampling::None),
            Err(Error::Guard { .. })
        ));
    }
}
