//! Potentials with a weak repulsive singularity at the origin.
//!
//! The concrete family is the power-law potential of the autonomous equation
//! `u'' - u^(-a) = p0`,
//!
//! ```text
//! V(u) = -p0 u - u^(1-a) / (1-a),   0 < a < 1,  p0 < 0,
//! ```
//!
//! normalized so that `V(0) = 0` is the collision energy. It has a center at
//! `u_c = (-p0)^(-1/a)` and its period annulus projects onto `(0, beta)` with
//! `beta = ((a-1) p0)^(-1/a)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::safeguarded_newton;

/// `V` and its first four derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivatives {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

/// A potential on an open interval with a singular left endpoint where
/// `V' -> -inf` while `V` stays bounded, and a unique nondegenerate minimum.
pub trait SingularPotential {
    fn derivatives(&self, u: f64) -> Result<Derivatives>;

    /// Abscissa of the singular endpoint.
    fn singular_endpoint(&self) -> f64;

    /// Value of `V` at the singular endpoint, the energy of the annulus boundary.
    fn critical_energy(&self) -> f64;

    /// Abscissa of the unique local minimum.
    fn minimum(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawPotential {
    alpha: f64,
    p0: f64,
}

/// Roots of `V(u) = h`. `inner` is absent once the orbit reaches the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    pub inner: Option<f64>,
    pub outer: f64,
}

impl PowerLawPotential {
    pub fn new(alpha: f64, p0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} must lie in (0, 1)"
            )));
        }
        if !(p0 < 0.0) || !p0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "p0 = {p0} must be negative"
            )));
        }
        Ok(Self { alpha, p0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    fn q(&self) -> f64 {
        1.0 - self.alpha
    }

    /// `V(u)` without domain checks; `u = 0` is allowed.
    pub fn value(&self, u: f64) -> f64 {
        -self.p0 * u - singular_power(u, self.q()) / self.q()
    }

    pub fn slope(&self, u: f64) -> f64 {
        -self.p0 - u.powf(-self.alpha)
    }

    pub fn eval_derivatives(&self, u: f64) -> Result<Derivatives> {
        if !(u > 0.0) {
            return Err(Error::Domain(u));
        }
        let a = self.alpha;
        let ua = u.powf(-a);
        Ok(Derivatives {
            v: self.value(u),
            d1: -self.p0 - ua,
            d2: a * ua / u,
            d3: -a * (a + 1.0) * ua / (u * u),
            d4: a * (a + 1.0) * (a + 2.0) * ua / (u * u * u),
        })
    }

    /// `V(x + e) - V(x)` evaluated without cancellation for small `|e|`.
    pub fn increment(&self, x: f64, e: f64) -> f64 {
        if x == 0.0 {
            return self.value(e);
        }
        let q = self.q();
        let power_change = x.powf(q) * (q * (e / x).ln_1p()).exp_m1();
        -self.p0 * e - power_change / q
    }

    /// Center abscissa `u_c`, where `V'(u_c) = 0`.
    pub fn center(&self) -> f64 {
        (-self.p0).powf(-1.0 / self.alpha)
    }

    /// `V(u_c)`, the lowest admissible energy.
    pub fn center_energy(&self) -> f64 {
        let uc = self.center();
        // u_c^(1-a) = -p0 u_c, so V(u_c) = -p0 u_c (1 - 1/(1-a))
        -self.p0 * uc * (1.0 - 1.0 / self.q())
    }

    /// Outer endpoint `beta` of the period annulus, where `V(beta) = V(0) = 0`.
    pub fn annulus_edge(&self) -> f64 {
        ((self.alpha - 1.0) * self.p0).powf(-1.0 / self.alpha)
    }

    /// `V''(u_c)`, the squared frequency of small oscillations.
    pub fn center_curvature(&self) -> f64 {
        let uc = self.center();
        self.alpha * uc.powf(-self.alpha - 1.0)
    }

    pub fn turning_points(&self, h: f64) -> Result<TurningPoints> {
        if !h.is_finite() {
            return Err(Error::Input(format!("energy {h} is not finite")));
        }
        let vc = self.center_energy();
        let uc = self.center();
        if h < vc {
            return Err(Error::BelowCenter { h, center: vc });
        }
        if h == vc {
            return Ok(TurningPoints {
                inner: Some(uc),
                outer: uc,
            });
        }
        if self.alpha == 0.5 {
            return self.turning_points_half(h);
        }
        let f = |u: f64| (self.value(u) - h, self.slope(u));
        if h < 0.0 {
            let inner = safeguarded_newton(f, 0.0, uc, 400)?;
            let outer = safeguarded_newton(f, uc, self.annulus_edge(), 400)?;
            return Ok(TurningPoints {
                inner: Some(inner),
                outer,
            });
        }
        let beta = self.annulus_edge();
        if h == 0.0 || self.value(beta) >= h {
            return Ok(TurningPoints {
                inner: None,
                outer: beta,
            });
        }
        let mut hi = 2.0 * beta;
        let mut expansions = 0;
        while self.value(hi) <= h {
            hi *= 2.0;
            expansions += 1;
            if expansions > 2000 {
                return Err(Error::Numerical(format!(
                    "cannot bracket outer root for h = {h}"
                )));
            }
        }
        let outer = safeguarded_newton(f, beta, hi, 400)?;
        Ok(TurningPoints { inner: None, outer })
    }

    /// For `a = 1/2` the equation `V(u) = h` is the quadratic
    /// `(-p0) s^2 - 2 s - h = 0` in `s = sqrt(u)`.
    fn turning_points_half(&self, h: f64) -> Result<TurningPoints> {
        let a = -self.p0;
        let g = |s: f64| (a * s * s - 2.0 * s - h, 2.0 * a * s - 2.0);
        let disc = (1.0 + a * h).max(0.0);
        let s_plus = (1.0 + disc.sqrt()) / a;
        let s_plus = polish(g, s_plus);
        if h < 0.0 {
            // product of the roots is -h / a
            let s_minus = polish(g, (-h / a) / s_plus);
            Ok(TurningPoints {
                inner: Some(s_minus * s_minus),
                outer: s_plus * s_plus,
            })
        } else if h == 0.0 {
            Ok(TurningPoints {
                inner: None,
                outer: self.annulus_edge(),
            })
        } else {
            Ok(TurningPoints {
                inner: None,
                outer: s_plus * s_plus,
            })
        }
    }
}

fn polish<G: Fn(f64) -> (f64, f64)>(g: G, mut s: f64) -> f64 {
    for _ in 0..2 {
        let (val, der) = g(s);
        if der == 0.0 || val == 0.0 {
            break;
        }
        let next = s - val / der;
        if !next.is_finite() {
            break;
        }
        s = next;
    }
    s
}

fn singular_power(u: f64, q: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.powf(q)
    }
}

impl SingularPotential for PowerLawPotential {
    fn derivatives(&self, u: f64) -> Result<Derivatives> {
        self.eval_derivatives(u)
    }

    fn singular_endpoint(&self) -> f64 {
        0.0
    }

    fn critical_energy(&self) -> f64 {
        0.0
    }

    fn minimum(&self) -> f64 {
        self.center()
    }
}

/// `5 (V''')^2 - 3 V'' V''''`, whose sign decides monotonicity of the period.
pub fn schaaf_expression<P: SingularPotential>(potential: &P, u: f64) -> Result<f64> {
    let d = potential.derivatives(u)?;
    Ok(5.0 * d.d3 * d.d3 - 3.0 * d.d2 * d.d4)
}

/// Closed form `a^2 (a+1) (2a-1) u^(-2(a+2))` of [`schaaf_expression`] for the
/// power-law family.
pub fn schaaf_closed_form(alpha: f64, u: f64) -> f64 {
    alpha * alpha * (alpha + 1.0) * (2.0 * alpha - 1.0) * u.powf(-2.0 * (alpha + 2.0))
}

/// The integrand factors `phi = ((V')^2 - 2 V V'') / (V')^3` and
/// `psi = 1 - 2 V V'' / (V')^2`.
pub fn schaaf_integrands<P: SingularPotential>(potential: &P, u: f64) -> Result<(f64, f64)> {
    let d = potential.derivatives(u)?;
    let scale = (u * d.d2.abs()).max(1.0);
    if d.d1.abs() <= 1e-12 * scale {
        return Err(Error::SingularIntegrand(u));
    }
    let slope_sq = d.d1 * d.d1;
    let phi = (slope_sq - 2.0 * d.v * d.d2) / (slope_sq * d.d1);
    let psi = 1.0 - 2.0 * d.v * d.d2 / slope_sq;
    Ok((phi, psi))
}

/// `eta = ((a-1) p1)^(-1/a)` and the collision guard `gamma = sqrt(2 (p1 - p2) eta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionGuard {
    pub eta: f64,
    pub gamma: f64,
}

pub fn gamma_threshold(alpha: f64, p1: f64, p2: f64) -> Result<CollisionGuard> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    if !(p1 < 0.0) || !(p2 <= p1) {
        return Err(Error::InvalidBounds { p1, p2 });
    }
    let eta = ((alpha - 1.0) * p1).powf(-1.0 / alpha);
    let gamma = (2.0 * (p1 - p2) * eta).sqrt();
    Ok(CollisionGuard { eta, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn derivatives_at_center_for_half() {
        let p = PowerLawPotential::new(0.5, -1.0).unwrap();
        let d = p.eval_derivatives(1.0).unwrap();
        assert!(close(d.v, -1.0, 1e-15));
        assert!(close(d.d1, 0.0, 1e-15));
        assert!(close(d.d2, 0.5, 1e-15));
        assert!(close(p.value(4.0), 0.0, 1e-15));
    }

    #[test]
    fn center_is_critical_for_any_parameters() {
        for &(a, p0) in &[(0.25, -1.0), (0.75, -0.3), (0.5, -7.0), (0.9, -2.5)] {
            let p = PowerLawPotential::new(a, p0).unwrap();
            let uc = p.center();
            let d = p.eval_derivatives(uc).unwrap();
            assert!(d.d1.abs() < 1e-13, "V'(u_c) = {}", d.d1);
            assert!(d.d2 > 0.0);
            assert!(close(p.center_energy(), d.v, 1e-13));
        }
    }

    #[test]
    fn nonpositive_abscissa_is_a_domain_error() {
        let p = PowerLawPotential::new(0.5, -1.0).unwrap();
        assert_eq!(p.eval_derivatives(0.0), Err(Error::Domain(0.0)));
        assert!(p.eval_derivatives(-1.0).is_err());
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(PowerLawPotential::new(1.0, -1.0).is_err());
        assert!(PowerLawPotential::new(0.0, -1.0).is_err());
        assert!(PowerLawPotential::new(0.5, 0.0).is_err());
    }

    #[test]
    fn turning_points_half() {
        let p = PowerLawPotential::new(0.5, -1.0).unwrap();
        let tp = p.turning_points(-0.75).unwrap();
        assert!(close(tp.inner.unwrap(), 0.25, 1e-14));
        assert!(close(tp.outer, 2.25, 1e-14));

        let tp = p.turning_points(-1.0).unwrap();
        assert_eq!(tp.inner, Some(1.0));
        assert_eq!(tp.outer, 1.0);

        let tp = p.turning_points(1.0).unwrap();
        assert_eq!(tp.inner, None);
        let expected = (1.0 + 2f64.sqrt()).powi(2);
        assert!(close(tp.outer, expected, 1e-13));
        assert!(close(tp.outer, 5.828427, 1e-6));
    }

    #[test]
    fn below_center_is_an_error() {
        let p = PowerLawPotential::new(0.5, -1.0).unwrap();
        assert!(matches!(
            p.turning_points(-1.5),
            Err(Error::BelowCenter { .. })
        ));
    }

    #[test]
    fn turning_points_general_alpha() {
        for &a in &[0.2, 0.25, 0.6, 0.75, 0.95] {
            let p = PowerLawPotential::new(a, -1.3).unwrap();
            let vc = p.center_energy();
            for &frac in &[0.999, 0.7, 0.3, 1e-3] {
                let h = vc * frac;
                let tp = p.turning_points(h).unwrap();
                let inner = tp.inner.unwrap();
                assert!(inner < p.center() && p.center() < tp.outer);
                assert!(tp.outer < p.annulus_edge());
                assert!((p.value(inner) - h).abs() < 1e-12);
                assert!((p.value(tp.outer) - h).abs() < 1e-12);
            }
            for &h in &[1e-8, 0.5, 10.0, 1e4] {
                let tp = p.turning_points(h).unwrap();
                assert!(tp.inner.is_none());
                assert!(tp.outer > p.annulus_edge());
                assert!(p.slope(tp.outer) > 0.0);
                assert!((p.value(tp.outer) - h).abs() < 1e-12 * h.max(1.0));
            }
        }
    }

    #[test]
    fn schaaf_examples() {
        let p = PowerLawPotential::new(0.75, -1.0).unwrap();
        let s = schaaf_expression(&p, 1.0).unwrap();
        assert!(close(s, 63.0 / 128.0, 1e-14));

        let p = PowerLawPotential::new(0.5, -1.0).unwrap();
        for &u in &[0.01, 1.0, 37.0] {
            let s = schaaf_expression(&p, u).unwrap();
            let scale = 5.0 * p.eval_derivatives(u).unwrap().d3.powi(2);
            assert!(s.abs() <= 1e-14 * scale);
        }

        let p = PowerLawPotential::new(0.25, -1.0).unwrap();
        assert!(schaaf_expression(&p, 1.0).unwrap() < 0.0);
        assert!(schaaf_expression(&p, 0.0).is_err());
    }

    #[test]
    fn schaaf_integrand_examples() {
        let p = PowerLawPotential::new(0.5, -1.0).unwrap();
        let (_, psi) = schaaf_integrands(&p, 1e6).unwrap();
        assert!((psi - 1.0).abs() < 1e-2);
        assert_eq!(
            schaaf_integrands(&p, 1.0),
            Err(Error::SingularIntegrand(1.0))
        );

        let p = PowerLawPotential::new(0.75, -1.0).unwrap();
        for &u in &[1.01, 2.0, 10.0, 1e3] {
            let (phi, _) = schaaf_integrands(&p, u).unwrap();
            assert!(phi > 0.0, "phi({u}) = {phi}");
        }
    }

    #[test]
    fn gamma_examples() {
        let g = gamma_threshold(0.5, -1.9, -2.1).unwrap();
        assert!(close(g.eta, 0.95f64.powi(-2), 1e-14));
        assert!(close(g.eta, 1.108033, 1e-6));
        assert!(close(g.gamma, 0.4f64.sqrt() / 0.95, 1e-14));
        assert!(close(g.gamma, 0.665741, 1e-5));

        let g = gamma_threshold(0.5, -1.0, -1.0).unwrap();
        assert_eq!(g.gamma, 0.0);

        let g = gamma_threshold(0.5, -1.0, -2.0).unwrap();
        assert!(close(g.eta, 4.0, 1e-14));
        assert!(close(g.gamma, 8f64.sqrt(), 1e-14));

        assert!(matches!(
            gamma_threshold(0.5, 0.1, -1.0),
            Err(Error::InvalidBounds { .. })
        ));
        assert!(matches!(
            gamma_threshold(0.5, -2.0, -1.0),
            Err(Error::InvalidBounds { .. })
        ));
    }

    #[test]
    fn increment_matches_direct_difference() {
        let p = PowerLawPotential::new(0.3, -0.8).unwrap();
        for &(x, e) in &[(1.0, 0.25), (2.0, -0.5), (0.1, 0.05), (5.0, 3.0)] {
            let direct = p.value(x + e) - p.value(x);
            assert!((p.increment(x, e) - direct).abs() < 1e-14);
        }
        // tiny steps: first-order Taylor term dominates
        let x = 3.0;
        let e = 1e-20;
        assert!(((p.increment(x, e) / e) - p.slope(x)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn analytic_derivatives_match_finite_differences(
            a in 0.05f64..0.95, p0 in -5.0f64..-0.1, log_u in -2.0f64..3.0
        ) {
            let p = PowerLawPotential::new(a, p0).unwrap();
            let u = 10f64.powf(log_u);
            let d = p.eval_derivatives(u).unwrap();
            let s = 1e-4 * u;
            let fd1 = (p.value(u + s) - p.value(u - s)) / (2.0 * s);
            let fd2 = (p.slope(u + s) - p.slope(u - s)) / (2.0 * s);
            prop_assert!((fd1 - d.d1).abs() <= 1e-6 * d.d1.abs().max(u.powf(-a)));
            prop_assert!((fd2 - d.d2).abs() <= 1e-6 * d.d2.abs());
        }

        #[test]
        fn schaaf_matches_closed_form(a in 0.05f64..0.95, log_u in -3.0f64..3.0) {
            let p = PowerLawPotential::new(a, -1.0).unwrap();
            let u = 10f64.powf(log_u);
            let num = schaaf_expression(&p, u).unwrap();
            let closed = schaaf_closed_form(a, u);
            let scale = 5.0 * p.eval_derivatives(u).unwrap().d3.powi(2);
            prop_assert!((num - closed).abs() <= 1e-10 * closed.abs().max(1e-4 * scale));
        }

        #[test]
        fn annulus_edge_has_zero_energy(a in 0.05f64..0.95, p0 in -5.0f64..-0.1) {
            let p = PowerLawPotential::new(a, p0).unwrap();
            prop_assert!(p.value(p.annulus_edge()).abs() < 1e-12 * (p0 * p.annulus_edge()).abs().max(1.0));
        }
    }
}
