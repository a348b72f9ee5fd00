//! The extended period function of the autonomous power-law oscillator.
//!
//! Below the collision energy (`V(u_c) < h < 0`) orbits are closed and `T(h)` is
//! their period; at and above it (`h >= 0`) orbits hit the singularity and `T(h)`
//! is the time between consecutive collisions. Both are computed from
//! `sqrt(2) * int du / sqrt(h - V(u))` with tanh-sinh quadrature on two halves:
//! split at `u_c` for closed orbits, at `beta` for bouncing ones.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::potential::PowerLawPotential;
use crate::quad::TanhSinh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Classical,
    Bouncing,
}

impl Regime {
    pub fn of(potential: &PowerLawPotential, h: f64) -> Result<Self> {
        let vc = potential.center_energy();
        if !(h >= vc) {
            return Err(Error::BelowCenter { h, center: vc });
        }
        Ok(if h < 0.0 {
            Regime::Classical
        } else {
            Regime::Bouncing
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Classical => "classical",
            Regime::Bouncing => "bouncing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodSample {
    pub h: f64,
    pub period: f64,
    pub regime: Regime,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodOptions {
    /// Absolute tolerance on `T`.
    pub tol: f64,
    /// Below this energy offset from the center the harmonic limit is returned.
    pub center_offset: f64,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            center_offset: 1e-8,
        }
    }
}

pub fn period_classical(p: &PowerLawPotential, h: f64) -> Result<PeriodSample> {
    period_classical_with(p, h, &PeriodOptions::default())
}

pub fn period_bouncing(p: &PowerLawPotential, h: f64) -> Result<PeriodSample> {
    period_bouncing_with(p, h, &PeriodOptions::default())
}

pub fn period_extended(p: &PowerLawPotential, h: f64) -> Result<PeriodSample> {
    period_extended_with(p, h, &PeriodOptions::default())
}

pub fn period_extended_with(
    p: &PowerLawPotential,
    h: f64,
    opts: &PeriodOptions,
) -> Result<PeriodSample> {
    match Regime::of(p, h)? {
        Regime::Classical => period_classical_with(p, h, opts),
        Regime::Bouncing => period_bouncing_with(p, h, opts),
    }
}

pub fn period_classical_with(
    p: &PowerLawPotential,
    h: f64,
    opts: &PeriodOptions,
) -> Result<PeriodSample> {
    let vc = p.center_energy();
    if !(h > vc && h < 0.0) {
        if h == vc {
            return Ok(harmonic_limit(p, h));
        }
        return Err(Error::Regime {
            h,
            expected: "classical",
        });
    }
    if h - vc < opts.center_offset * vc.abs().max(1.0) {
        return Ok(harmonic_limit(p, h));
    }
    let tp = p.turning_points(h)?;
    let inner = tp
        .inner
        .ok_or_else(|| Error::Numerical("missing inner turning point".into()))?;
    let outer = tp.outer;
    let uc = p.center();
    let quad = TanhSinh::with_tol(0.25 * opts.tol);

    // Each half uses its own turning point as the exact root: the half integral
    // is smooth in the energy, so the rounding of V(u_-) against h is harmless.
    // At u_c the gap is far from zero and is anchored on h, since
    // `inner - uc` rounds away the inner point near the collision energy.
    let center_gap = h - p.value(uc);
    let (left, left_err) = graded_integral(
        &quad,
        &graded_nodes(inner, 4.0 * inner, uc),
        |da| -p.increment(inner, da),
        |u| h - p.value(u),
        |db| center_gap - p.increment(uc, -db),
    )?;
    let outer_drop = p.increment(uc, outer - uc);
    let right = quad.integrate(
        |_, da, db| {
            let gap = if db <= da {
                -p.increment(outer, -db)
            } else {
                outer_drop - p.increment(uc, da)
            };
            inv_sqrt(gap)
        },
        uc,
        outer,
    )?;
    Ok(PeriodSample {
        h,
        period: SQRT_2 * (left + right.value),
        regime: Regime::Classical,
        error_estimate: SQRT_2 * (left_err + right.error_estimate),
    })
}

pub fn period_bouncing_with(
    p: &PowerLawPotential,
    h: f64,
    opts: &PeriodOptions,
) -> Result<PeriodSample> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::Regime {
            h,
            expected: "bouncing",
        });
    }
    let beta = p.annulus_edge();
    let quad = TanhSinh::with_tol(0.25 * opts.tol);

    // [0, beta]: the collision end is singular only when h = 0; for small
    // h > 0 the integrand turns over within u ~ (qh)^(1/q)
    let q = 1.0 - p.alpha();
    let knee = if h > 0.0 {
        4.0 * (q * h).powf(1.0 / q)
    } else {
        beta
    };
    let (mut value, mut error) = graded_integral(
        &quad,
        &graded_nodes(0.0, knee, beta),
        |da| h - p.value(da),
        |u| h - p.value(u),
        |db| h - p.increment(beta, -db),
    )?;

    let outer = p.turning_points(h)?.outer;
    if outer > beta {
        let top = p.value(outer);
        let right = quad.integrate(
            |_, da, db| {
                let gap = if db <= da {
                    -p.increment(outer, -db)
                } else {
                    top - p.increment(beta, da)
                };
                inv_sqrt(gap)
            },
            beta,
            outer,
        )?;
        value += right.value;
        error += right.error_estimate;
    }
    Ok(PeriodSample {
        h,
        period: SQRT_2 * value,
        regime: Regime::Bouncing,
        error_estimate: SQRT_2 * error,
    })
}

/// `[a, first, 16 first, 256 first, ..., b]`, or `[a, b]` when `first` is not
/// well inside the interval.
fn graded_nodes(a: f64, first: f64, b: f64) -> Vec<f64> {
    let mut nodes = vec![a];
    if first > a && first < 0.25 * b {
        let mut x = first;
        while x < 0.5 * b {
            nodes.push(x);
            x *= 16.0;
        }
    }
    nodes.push(b);
    nodes
}

/// `int 1/sqrt(gap)` over consecutive node pairs. The end pieces take the gap
/// as a function of the offset from their outer node so turning points keep
/// full relative accuracy.
fn graded_integral(
    quad: &TanhSinh,
    nodes: &[f64],
    left: impl Fn(f64) -> f64,
    mid: impl Fn(f64) -> f64,
    right: impl Fn(f64) -> f64,
) -> Result<(f64, f64)> {
    let last = nodes.len() - 2;
    let (mut value, mut error) = (0.0, 0.0);
    for (i, w) in nodes.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let r = quad.integrate(
            |_, da, db| {
                let gap = if da <= db {
                    if i == 0 {
                        left(da)
                    } else {
                        mid(a + da)
                    }
                } else if i == last {
                    right(db)
                } else {
                    mid(b - db)
                };
                inv_sqrt(gap)
            },
            a,
            b,
        )?;
        value += r.value;
        error += r.error_estimate;
    }
    Ok((value, error))
}

fn inv_sqrt(gap: f64) -> f64 {
    if gap > 0.0 {
        1.0 / gap.sqrt()
    } else {
        // only reachable at nodes that round onto a turning point, where the
        // quadrature weight has already underflowed
        0.0
    }
}

/// Period of small oscillations, `2 pi / sqrt(V''(u_c))`.
pub fn center_period(p: &PowerLawPotential) -> f64 {
    2.0 * PI / p.center_curvature().sqrt()
}

fn harmonic_limit(p: &PowerLawPotential, h: f64) -> PeriodSample {
    let vc = p.center_energy();
    let period = center_period(p);
    PeriodSample {
        h,
        period,
        regime: Regime::Classical,
        // first-order correction is O(h - V(u_c)); report its relative size
        error_estimate: period * (h - vc) / vc.abs().max(1.0),
    }
}

/// Exact extended period for `a = 1/2`.
pub fn period_closed_form_half(p0: f64, h: f64) -> Result<f64> {
    if !(p0 < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "p0 = {p0} must be negative"
        )));
    }
    let center = 1.0 / p0;
    if !(h >= center) {
        return Err(Error::BelowCenter { h, center });
    }
    let m = -p0;
    let base = 2.0 * SQRT_2 / m.powf(1.5);
    if h < 0.0 {
        return Ok(base * PI);
    }
    let arc = (m * h).powf(-0.5).atan();
    Ok(base * (0.5 * PI + arc) - 2.0 * (2.0 * h).sqrt() / p0)
}

/// Central difference estimate of `T'(h)`; the stencil is made one-sided
/// (second order) on the side of `h` when it would straddle `h = 0`, and
/// forward (bouncing side) at `h = 0` itself.
pub fn period_derivative(p: &PowerLawPotential, h: f64, step: f64) -> Result<f64> {
    let vc = p.center_energy();
    if !(step > 0.0) || !(h > vc) {
        return Err(Error::Accuracy { h, step });
    }
    let offset = h - vc;
    if step > 0.25 * offset || step > 0.1 * h.abs().max(1.0) {
        return Err(Error::Accuracy { h, step });
    }
    let t = |x: f64| period_extended(p, x).map(|s| s.period);
    if h == 0.0 || (h > 0.0 && h - step < 0.0) {
        let (t0, t1, t2) = (t(h)?, t(h + step)?, t(h + 2.0 * step)?);
        return Ok((-3.0 * t0 + 4.0 * t1 - t2) / (2.0 * step));
    }
    if h < 0.0 && h + step >= 0.0 {
        if h - 2.0 * step <= vc {
            return Err(Error::Accuracy { h, step });
        }
        let (t0, t1, t2) = (t(h)?, t(h - step)?, t(h - 2.0 * step)?);
        return Ok((3.0 * t0 - 4.0 * t1 + t2) / (2.0 * step));
    }
    Ok((t(h + step)? - t(h - step)?) / (2.0 * step))
}

/// First-order one-sided difference quotients `((T(h) - T(h-s))/s, (T(h+s) - T(h))/s)`.
pub fn one_sided_slopes(p: &PowerLawPotential, h: f64, step: f64) -> Result<(f64, f64)> {
    if !(step > 0.0) || !(h - step > p.center_energy()) {
        return Err(Error::Accuracy { h, step });
    }
    let t = |x: f64| period_extended(p, x).map(|s| s.period);
    let (below, at, above) = (t(h - step)?, t(h)?, t(h + step)?);
    Ok(((at - below) / step, (above - at) / step))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendRun {
    pub trend: Trend,
    pub h_start: f64,
    pub h_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanClass {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub samples: Vec<PeriodSample>,
    pub runs: Vec<TrendRun>,
    pub class: ScanClass,
    /// Grid intervals `[h_i, h_{i+2}]` bracketing each change of trend.
    pub transitions: Vec<(f64, f64)>,
    /// First grid energy after which every difference is positive.
    pub increasing_from: Option<f64>,
}

impl MonotonicityReport {
    pub fn trends(&self) -> Vec<Trend> {
        self.runs.iter().map(|r| r.trend).collect()
    }
}

/// Classifies successive differences of `T` on a strictly increasing grid.
/// Differences with `|dT| <= flat_tol * T` count as constant.
pub fn monotonicity_scan(
    p: &PowerLawPotential,
    grid: &[f64],
    flat_tol: f64,
) -> Result<MonotonicityReport> {
    if grid.len() < 3 {
        return Err(Error::Input(format!(
            "scan grid needs at least 3 points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("scan grid must be strictly increasing".into()));
    }
    let samples = period_scan(p, grid)?;

    let trends: Vec<Trend> = samples
        .windows(2)
        .map(|w| {
            let d = w[1].period - w[0].period;
            if d.abs() <= flat_tol * w[0].period.abs() {
                Trend::Constant
            } else if d > 0.0 {
                Trend::Increasing
            } else {
                Trend::Decreasing
            }
        })
        .collect();

    let mut runs: Vec<TrendRun> = Vec::new();
    let mut transitions = Vec::new();
    for (i, &trend) in trends.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.trend == trend => run.h_end = grid[i + 1],
            _ => {
                if i > 0 {
                    transitions.push((grid[i - 1], grid[i + 1]));
                }
                runs.push(TrendRun {
                    trend,
                    h_start: grid[i],
                    h_end: grid[i + 1],
                });
            }
        }
    }
    let class = if runs.len() == 1 {
        match runs[0].trend {
            Trend::Increasing => ScanClass::Increasing,
            Trend::Decreasing => ScanClass::Decreasing,
            Trend::Constant => ScanClass::Constant,
        }
    } else {
        ScanClass::Mixed
    };
    let increasing_from = runs
        .last()
        .filter(|r| r.trend == Trend::Increasing)
        .map(|r| r.h_start);
    Ok(MonotonicityReport {
        samples,
        runs,
        class,
        transitions,
        increasing_from,
    })
}

/// Evaluates `T` on a grid; results keep the grid order.
pub fn period_scan(p: &PowerLawPotential, grid: &[f64]) -> Result<Vec<PeriodSample>> {
    period_scan_with(p, grid, &PeriodOptions::default())
}

pub fn period_scan_with(
    p: &PowerLawPotential,
    grid: &[f64],
    opts: &PeriodOptions,
) -> Result<Vec<PeriodSample>> {
    grid.par_iter()
        .map(|&h| period_extended_with(p, h, opts))
        .collect()
}

pub fn write_period_csv<W: Write + ?Sized>(
    out: &mut W,
    samples: &[PeriodSample],
) -> std::io::Result<()> {
    writeln!(out, "h,T,regime,err")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(s.h),
            fmt_f64(s.period),
            s.regime.as_str(),
            fmt_f64(s.error_estimate)
        )?;
    }
    Ok(())
}
