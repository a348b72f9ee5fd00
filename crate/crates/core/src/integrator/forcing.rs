//! Negative trigonometric-polynomial forcing with certified bounds.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

/// JSON form: `{"c0": -2.0, "harmonics": [{"k": 1, "a": 0.1, "b": 0.0}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub c0: f64,
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
}

/// `p(t) = c0 + sum a_k cos(kt) + b_k sin(kt)` with `p2 <= p(t) <= p1 < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    c0: f64,
    harmonics: Vec<Harmonic>,
    p1: f64,
    p2: f64,
}

const SAMPLES: usize = 4096;

impl Forcing {
    pub fn new(c0: f64, harmonics: Vec<Harmonic>) -> Result<Self> {
        if !c0.is_finite() {
            return Err(Error::InvalidParameter(format!("mean forcing c0 = {c0}")));
        }
        for h in &harmonics {
            if h.k == 0 || !h.a.is_finite() || !h.b.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "harmonic k = {} with coefficients ({}, {})",
                    h.k, h.a, h.b
                )));
            }
        }
        let harmonics: Vec<Harmonic> = harmonics
            .into_iter()
            .filter(|h| h.a != 0.0 || h.b != 0.0)
            .collect();
        let mut f = Self {
            c0,
            harmonics,
            p1: c0,
            p2: c0,
        };
        if !f.harmonics.is_empty() {
            let (p1, p2) = f.certify();
            f.p1 = p1;
            f.p2 = p2;
        }
        if !(f.p1 < 0.0) {
            return Err(Error::InvalidBounds { p1: f.p1, p2: f.p2 });
        }
        Ok(f)
    }

    pub fn constant(p0: f64) -> Result<Self> {
        Self::new(p0, Vec::new())
    }

    pub fn from_spec(spec: &ForcingSpec) -> Result<Self> {
        Self::new(spec.c0, spec.harmonics.clone())
    }

    pub fn spec(&self) -> ForcingSpec {
        ForcingSpec {
            c0: self.c0,
            harmonics: self.harmonics.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ForcingSpec =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("forcing JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn mean(&self) -> f64 {
        self.c0
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    /// Certified upper bound of `p`.
    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Certified lower bound of `p`.
    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn is_constant(&self) -> bool {
        self.harmonics.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut p = self.c0;
        for h in &self.harmonics {
            let (s, c) = (h.k as f64 * t).sin_cos();
            p += h.a * c + h.b * s;
        }
        p
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let mut d = 0.0;
        for h in &self.harmonics {
            let k = h.k as f64;
            let (s, c) = (k * t).sin_cos();
            d += k * (h.b * c - h.a * s);
        }
        d
    }

    /// Forcing of the time-reversed equation, `t -> p(-t)`.
    pub fn reversed(&self) -> Self {
        Self {
            c0: self.c0,
            harmonics: self
                .harmonics
                .iter()
                .map(|h| Harmonic {
                    k: h.k,
                    a: h.a,
                    b: -h.b,
                })
                .collect(),
            p1: self.p1,
            p2: self.p2,
        }
    }

    /// Second-order enclosure on each sampling cell: within distance `d` of a
    /// node, `|p(t) - p(t_i) - p'(t_i)(t - t_i)| <= M2 d^2 / 2` with
    /// `M2 = sum k^2 |c_k|`.
    fn certify(&self) -> (f64, f64) {
        let dt = TAU / SAMPLES as f64;
        let radius = 0.5 * dt;
        let m2: f64 = self
            .harmonics
            .iter()
            .map(|h| (h.k as f64).powi(2) * h.a.hypot(h.b))
            .sum();
        let amplitude: f64 = self.harmonics.iter().map(|h| h.a.hypot(h.b)).sum();
        let rounding = 16.0 * f64::EPSILON * (self.c0.abs() + amplitude);
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for i in 0..SAMPLES {
            let t = (i as f64 + 0.5) * dt;
            let p = self.eval(t);
            let slack = self.derivative(t).abs() * radius + 0.5 * m2 * radius * radius + rounding;
            hi = hi.max(p + slack);
            lo = lo.min(p - slack);
        }
        // never looser than the triangle inequality
        (hi.min(self.c0 + amplitude), lo.max(self.c0 - amplitude))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(c0: f64, a: f64) -> Forcing {
        Forcing::new(c0, vec![Harmonic { k: 1, a, b: 0.0 }]).unwrap()
    }

    #[test]
    fn cosine_bounds_are_certified_and_tight() {
        let f = single(-2.0, 0.1);
        assert!(f.p1() >= -1.9 && f.p1() < -1.9 + 1e-6, "{}", f.p1());
        assert!(f.p2() <= -2.1 && f.p2() > -2.1 - 1e-6);
    }

    #[test]
    fn constant_bounds_are_exact() {
        let f = Forcing::constant(-1.0).unwrap();
        assert_eq!((f.p1(), f.p2()), (-1.0, -1.0));
        assert!(f.is_constant());
    }

    #[test]
    fn nonnegative_maximum_is_rejected() {
        assert!(matches!(
            Forcing::new(
                -0.05,
                vec![Harmonic {
                    k: 1,
                    a: 0.1,
                    b: 0.0
                }]
            ),
            Err(Error::InvalidBounds { .. })
        ));
        assert!(Forcing::constant(0.0).is_err());
    }

    #[test]
    fn reversal_mirrors_time() {
        let f = Forcing::new(
            -1.0,
            vec![Harmonic {
                k: 2,
                a: 0.1,
                b: 0.3,
            }],
        )
        .unwrap();
        let r = f.reversed();
        for &t in &[0.0, 0.3, 1.7, -2.5] {
            assert!((r.eval(t) - f.eval(-t)).abs() < 1e-15);
        }
    }

    #[test]
    fn json_round_trip() {
        let f = Forcing::from_json(r#"{"c0": -2, "harmonics": [{"k": 1, "a": 0.1}]}"#).unwrap();
        assert_eq!(f.eval(0.0), -1.9);
        let text = serde_json::to_string(&f.spec()).unwrap();
        assert_eq!(Forcing::from_json(&text).unwrap(), f);
    }

    #[test]
    fn bounds_enclose_dense_samples_for_mixed_harmonics() {
        let f = Forcing::new(
            -3.0,
            vec![
                Harmonic {
                    k: 1,
                    a: 0.4,
                    b: -0.2,
                },
                Harmonic {
                    k: 5,
                    a: 0.3,
                    b: 0.25,
                },
            ],
        )
        .unwrap();
        for i in 0..100_000 {
            let t = TAU * i as f64 / 100_000.0;
            let p = f.eval(t);
            assert!(f.p2() <= p && p <= f.p1());
        }
    }
}
