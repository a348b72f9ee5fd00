//! The successor map between consecutive collisions.
//!
//! `S(t0, v0) = (t1, v1)` sends a launch from the wall at time `t0` with speed
//! `v0` to the next collision time and the speed there. On the lift
//! `S(t0 + 2pi, v0) = S(t0, v0) + (2pi, 0)`.

use std::f64::consts::TAU;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{ClassicalExit, Direction, Oscillator, Sampling};
use crate::io::fmt_f64;
use crate::potential::{gamma_threshold, PowerLawPotential};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub t: f64,
    pub v: f64,
}

impl SectionPoint {
    pub fn new(t: f64, v: f64) -> Self {
        Self { t, v }
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.v * self.v
    }

    /// Angular coordinate in `[0, 2pi)`.
    pub fn angle(&self) -> f64 {
        self.t.rem_euclid(TAU)
    }
}

/// One bounce without the guard check: launch, arc, next collision.
fn bounce(osc: &Oscillator, pt: SectionPoint) -> Result<SectionPoint> {
    let out = osc.cross_collision(pt.t, pt.energy(), Direction::Outgoing)?;
    let horizon = out.t_end + flight_time_bound(osc, pt.v);
    let arc =
        osc.integrate_classical(out.t_end, osc.delta(), out.v_end, horizon, Sampling::None)?;
    if arc.exit == ClassicalExit::Timeout {
        return Err(Error::NoCollision { t: arc.end.t });
    }
    let w = 0.5 * arc.end.v * arc.end.v + osc.singular_potential(osc.delta());
    let inc = osc.cross_collision(arc.end.t, w, Direction::Incoming)?;
    Ok(SectionPoint {
        t: inc.t_end,
        v: (2.0 * inc.w_end).sqrt(),
    })
}

/// Generous horizon for one flight: ballistic time under `p1` plus several
/// small-oscillation periods of the `p1` potential.
fn flight_time_bound(osc: &Oscillator, v: f64) -> f64 {
    let p1 = osc.forcing().p1();
    let a = osc.alpha();
    let center = (-p1).powf(-1.0 / a);
    let harmonic = TAU / (a * center.powf(-a - 1.0)).sqrt();
    10.0 + 4.0 * v / -p1 + 10.0 * harmonic
}

/// `S(pt)`; requires `pt.v > gamma`.
pub fn successor(osc: &Oscillator, pt: SectionPoint) -> Result<SectionPoint> {
    let gamma = osc.guard().gamma;
    if !(pt.v > gamma) {
        return Err(Error::Guard { v: pt.v, gamma });
    }
    bounce(osc, pt)
}

/// `S^n(pt)` with every intermediate point; `points[0] = pt`.
pub fn successor_iterate(
    osc: &Oscillator,
    pt: SectionPoint,
    n: usize,
) -> Result<Vec<SectionPoint>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "iterate count n must be at least 1".into(),
        ));
    }
    let gamma = osc.guard().gamma;
    let mut points = Vec::with_capacity(n + 1);
    points.push(pt);
    for index in 0..n {
        let p = points[index];
        if !(p.v > gamma) {
            return Err(Error::IterateUndefined {
                index,
                v: p.v,
                gamma,
            });
        }
        points.push(bounce(osc, p)?);
    }
    Ok(points)
}

/// `gamma_1 < ... < gamma_n`; launch speeds above `gamma_n` certify `n` impacts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaLadder {
    pub thresholds: Vec<f64>,
    /// Outer turning points `u_k` of the `p1` level sets at `gamma_k^2/2`.
    pub abscissae: Vec<f64>,
}

impl GammaLadder {
    pub fn top(&self) -> f64 {
        *self.thresholds.last().unwrap()
    }
}

/// Default `gamma_1 - gamma`: relative `1e-3`, absolute `1e-3` when `gamma = 0`.
pub fn default_margin(gamma: f64) -> f64 {
    if gamma > 0.0 {
        1e-3 * gamma
    } else {
        1e-3
    }
}

pub fn gamma_ladder(alpha: f64, p1: f64, p2: f64, n: usize, margin: f64) -> Result<GammaLadder> {
    if !(margin > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ladder margin {margin} must be positive"
        )));
    }
    let guard = gamma_threshold(alpha, p1, p2)?;
    gamma_ladder_from(alpha, p1, p2, n, guard.gamma + margin)
}

/// Ladder with an explicit first rung `gamma_1 > gamma`.
pub fn gamma_ladder_from(
    alpha: f64,
    p1: f64,
    p2: f64,
    n: usize,
    gamma1: f64,
) -> Result<GammaLadder> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "ladder length n must be at least 1".into(),
        ));
    }
    let guard = gamma_threshold(alpha, p1, p2)?;
    if !(gamma1 > guard.gamma) {
        return Err(Error::Guard {
            v: gamma1,
            gamma: guard.gamma,
        });
    }
    let level = PowerLawPotential::new(alpha, p1)?;
    let mut thresholds = vec![gamma1];
    let mut abscissae = Vec::with_capacity(n);
    for k in 0..n {
        let g = thresholds[k];
        let u = level.turning_points(0.5 * g * g)?.outer;
        abscissae.push(u);
        if k + 1 < n {
            thresholds.push((g * g + 2.0 * (p1 - p2) * u).sqrt());
        }
    }
    Ok(GammaLadder {
        thresholds,
        abscissae,
    })
}

/// Finite-difference Jacobian of `S^n` in `(t, E = v^2/2)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianReport {
    /// Rows `(t_n, E_n)`, columns `(t_0, E_0)`.
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
    /// Determinant in `(t, v)` coordinates, `det * v0 / v_n`.
    pub det_tv: f64,
    /// Determinant with half the difference step.
    pub det_half_step: f64,
    /// Step actually used after any shrinking near the guard.
    pub step: f64,
}

fn map_te(osc: &Oscillator, t: f64, e: f64, n: usize) -> Result<(f64, f64)> {
    let end = *successor_iterate(osc, SectionPoint::new(t, (2.0 * e).sqrt()), n)?
        .last()
        .unwrap();
    Ok((end.t, end.energy()))
}

fn central_jacobian(
    osc: &Oscillator,
    pt: SectionPoint,
    n: usize,
    step: f64,
) -> Result<[[f64; 2]; 2]> {
    let e0 = pt.energy();
    let ht = step;
    let he = step * e0.max(1.0);
    let (tp, ep) = map_te(osc, pt.t + ht, e0, n)?;
    let (tm, em) = map_te(osc, pt.t - ht, e0, n)?;
    let (tq, eq) = map_te(osc, pt.t, e0 + he, n)?;
    let (tr, er) = map_te(osc, pt.t, e0 - he, n)?;
    Ok([
        [(tp - tm) / (2.0 * ht), (tq - tr) / (2.0 * he)],
        [(ep - em) / (2.0 * ht), (eq - er) / (2.0 * he)],
    ])
}

fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn jacobian(
    osc: &Oscillator,
    pt: SectionPoint,
    n: usize,
    fd_step: f64,
) -> Result<JacobianReport> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "difference step {fd_step}"
        )));
    }
    let end = *successor_iterate(osc, pt, n)?.last().unwrap();
    let mut step = fd_step;
    let mut last_err = None;
    for _ in 0..5 {
        let attempt = central_jacobian(osc, pt, n, step)
            .and_then(|m| Ok((m, central_jacobian(osc, pt, n, 0.5 * step)?)));
        match attempt {
            Ok((matrix, half)) => {
                let det = det2(&matrix);
                return Ok(JacobianReport {
                    matrix,
                    det,
                    det_tv: det * pt.v / end.v,
                    det_half_step: det2(&half),
                    step,
                });
            }
            Err(e @ (Error::Guard { .. } | Error::IterateUndefined { .. })) => {
                last_err = Some(e);
                step *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

/// `Delta(t0, v0) = S_1^n(t0, v0) - t0 - 2 m pi` on a grid; `None` where the
/// iterate is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistProfile {
    pub t0: Vec<f64>,
    pub v0: Vec<f64>,
    pub n: usize,
    pub m: u32,
    /// Images `S^n`, row-major with `t0` as the slow index.
    pub images: Vec<Option<SectionPoint>>,
}

impl TwistProfile {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.v0.len() + j
    }

    pub fn image(&self, i: usize, j: usize) -> Option<SectionPoint> {
        self.images[self.index(i, j)]
    }

    /// Angular discrepancy `S_1^n - t0 - 2 m pi`.
    pub fn delta(&self, i: usize, j: usize) -> Option<f64> {
        self.image(i, j)
            .map(|s| s.t - self.t0[i] - TAU * self.m as f64)
    }

    /// Radial discrepancy `S_2^n - v0`.
    pub fn radial(&self, i: usize, j: usize) -> Option<f64> {
        self.image(i, j).map(|s| s.v - self.v0[j])
    }

    pub fn rows(&self) -> Vec<GridRow> {
        let mut rows = Vec::with_capacity(self.images.len());
        for i in 0..self.t0.len() {
            for j in 0..self.v0.len() {
                let img = self.image(i, j);
                rows.push(GridRow {
                    t0: self.t0[i],
                    v0: self.v0[j],
                    t_out: img.map(|s| s.t),
                    v_out: img.map(|s| s.v),
                    delta: self.delta(i, j),
                    det: None,
                });
            }
        }
        rows
    }
}

pub fn twist_profile(
    osc: &Oscillator,
    t0_grid: &[f64],
    v_grid: &[f64],
    n: usize,
    m: u32,
) -> TwistProfile {
    let cells: Vec<(f64, f64)> = t0_grid
        .iter()
        .flat_map(|&t| v_grid.iter().map(move |&v| (t, v)))
        .collect();
    let images = cells
        .par_iter()
        .map(|&(t, v)| {
            successor_iterate(osc, SectionPoint::new(t, v), n)
                .ok()
                .map(|p| *p.last().unwrap())
        })
        .collect();
    TwistProfile {
        t0: t0_grid.to_vec(),
        v0: v_grid.to_vec(),
        n,
        m,
        images,
    }
}

/// Row of a section-map grid export; undefined entries are left empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow {
    pub t0: f64,
    pub v0: f64,
    pub t_out: Option<f64>,
    pub v_out: Option<f64>,
    pub delta: Option<f64>,
    pub det: Option<f64>,
}

/// CSV with header `t0,v0,t_out,v_out,delta,det`.
pub fn write_grid_csv<W: Write>(rows: &[GridRow], mut out: W) -> std::io::Result<()> {
    let cell = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    writeln!(out, "t0,v0,t_out,v_out,delta,det")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.t0),
            fmt_f64(r.v0),
            cell(r.t_out),
            cell(r.v_out),
            cell(r.delta),
            cell(r.det)
        )?;
    }
    Ok(())
}

/// `n` evenly spaced points of `[a, b)`.
pub fn linspace_open(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `n` log-spaced points of `[a, b]`.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
