//! Scalar root finding on a bracket.

use crate::error::{Error, Result};

/// Safeguarded Newton iteration for `f` on `[lo, hi]` with `f(lo)` and `f(hi)` of
/// opposite sign. Falls back to bisection whenever the Newton iterate leaves the
/// current bracket or fails to halve the residual.
pub fn safeguarded_newton<F>(f: F, mut lo: f64, mut hi: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    let lo_negative = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    let mut prev_residual = f64::INFINITY;
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let width = (hi - lo).abs();
        if width <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        let inside = newton.is_finite() && newton > lo.min(hi) && newton < lo.max(hi);
        let next = if inside && fx.abs() < 0.5 * prev_residual {
            newton
        } else {
            0.5 * (lo + hi)
        };
        prev_residual = fx.abs();
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    Ok(x)
}

/// Plain bisection keeping the sign structure of the bracket.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "root not bracketed on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_finds_sqrt_two() {
        let r = safeguarded_newton(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 100).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn newton_survives_flat_derivative() {
        // derivative vanishes at the left end of the bracket
        let r = safeguarded_newton(|x| (x * x * x - 1e-3, 3.0 * x * x), 0.0, 1.0, 200).unwrap();
        assert!((r - 0.1).abs() < 1e-14);
    }

    #[test]
    fn unbracketed_is_an_error() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 60).is_err());
    }
}
