//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Tolerance and depth limit for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_depth: 40,
        }
    }
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, max_depth: u32) -> Result<Self> {
        let q = Self { abs_tol, max_depth };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_depth < 1 {
            return Err(Error::Params(format!(
                "quadrature needs abs_tol > 0 and max_depth >= 1, got {:?}",
                self
            )));
        }
        Ok(())
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `q.abs_tol`.
///
/// The tolerance is split in half at every bisection and each accepted panel
/// gets the usual Richardson correction. When a panel still fails the test at
/// `q.max_depth` the whole integral fails with that panel's error estimate.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, q: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    q.validate()?;
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    step(&f, a, b, fa, fm, fb, whole, q.abs_tol, q.max_depth)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature {
            a,
            b,
            estimate: diff.abs() / 15.0,
        });
    }
    let l = step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_up_to_cubic_are_exact() {
        let q = QuadratureConfig::default();
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, &q).unwrap();
        // 1/4 x^4 - x^2 + x on [-1, 2]
        assert!((v - 3.75).abs() < 1e-13);
    }

    #[test]
    fn sine_integral() {
        let q = QuadratureConfig::default();
        let v = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, &q).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let q = QuadratureConfig::default();
        let a = adaptive_simpson(f64::exp, 0.0, 1.0, &q).unwrap();
        let b = adaptive_simpson(f64::exp, 1.0, 0.0, &q).unwrap();
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn depth_exhaustion_reports_estimate() {
        let q = QuadratureConfig {
            abs_tol: 1e-300,
            max_depth: 2,
        };
        match adaptive_simpson(f64::exp, 0.0, 1.0, &q) {
            Err(Error::Quadrature { estimate, .. }) => assert!(estimate > 0.0),
            other => panic!("expected quadrature error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(QuadratureConfig::new(0.0, 10).is_err());
        assert!(QuadratureConfig::new(1e-8, 0).is_err());
    }
}
