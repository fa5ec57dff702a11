//! The approximate retraction `R_eps: I^n -> J^{n-1}` and the homotopies
//! built from it.

use serde::Serialize;

use crate::cubelat::{CubicalComplex, Domain};
use crate::error::{domain, params, Result};
use crate::fnexpr::{Homotopy, SmoothMap};
use crate::kernels::SmashParams;
use crate::tame::blend;

/// `0 < sigma < eps_prime < eps < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetractionParams {
    pub n: usize,
    pub eps: f64,
    pub sigma: f64,
    pub eps_prime: f64,
}

impl RetractionParams {
    pub fn new(n: usize, eps: f64, sigma: f64, eps_prime: f64) -> Result<Self> {
        let p = Self {
            n,
            eps,
            sigma,
            eps_prime,
        };
        p.validate()?;
        Ok(p)
    }

    /// `sigma = eps/2`, `eps_prime = 3 eps/4`.
    pub fn from_eps(n: usize, eps: f64) -> Result<Self> {
        Self::new(n, eps, 0.5 * eps, 0.75 * eps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(params("retraction needs n >= 1"));
        }
        if !(0.0 < self.sigma && self.sigma < self.eps_prime && self.eps_prime < self.eps && self.eps < 0.5)
        {
            return Err(params(format!(
                "retraction needs 0 < sigma < eps' < eps < 1/2, got sigma={}, eps'={}, eps={}",
                self.sigma, self.eps_prime, self.eps
            )));
        }
        Ok(())
    }
}

/// `R(t, u) = (T_{m(u),eps}(t_1), .., T_{m(u),eps}(t_{n-1}), v(t, u))` with
/// `m(u) = (1 - u) eps' + u sigma` and
/// `v = T_{sigma,eps}(u) + T_{sigma,eps}(1 - u) prod_k lambda(t_k/m) lambda((1 - t_k)/m)`.
pub fn approx_retraction(p: &RetractionParams) -> Result<SmoothMap> {
    p.validate()?;
    let n = p.n;
    let u = SmoothMap::coord(n, n - 1)?;
    let m = u.scale_shift(p.sigma - p.eps_prime, p.eps_prime)?;
    let eps = SmoothMap::constant(n, vec![p.eps])?;
    let smash = SmoothMap::smash(SmashParams::new(p.sigma, p.eps)?, 1);
    let lam = SmoothMap::lambda(1);

    let mut out = Vec::with_capacity(n);
    let mut factors = Vec::with_capacity(2 * n);
    for k in 0..n - 1 {
        let t = SmoothMap::coord(n, k)?;
        out.push(SmoothMap::tuple(vec![m.clone(), eps.clone(), t.clone()])?.then(SmoothMap::smash_dyn())?);
        for num in [t.clone(), t.scale_shift(-1.0, 1.0)?] {
            factors.push(SmoothMap::tuple(vec![num, m.clone()])?.then(SmoothMap::div())?.then(lam.clone())?);
        }
    }
    let up = u.then(smash.clone())?;
    let down = u.scale_shift(-1.0, 1.0)?.then(smash)?;
    let v = if factors.is_empty() {
        // empty product: v = T(u) + T(1 - u) = 1
        SmoothMap::constant(n, vec![1.0])?
    } else {
        factors.insert(0, down);
        SmoothMap::sum(vec![up, SmoothMap::product(factors)?])?
    };
    out.push(v);
    Ok(SmoothMap::tuple(out)?.on_cube())
}

/// Internal choices behind [`deformation_retraction_homotopy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformationParams {
    pub n: usize,
    pub eps: f64,
    /// Retraction applied after the smash step; its `eps` is `eps^{n-1}`
    /// except for `n = 1`, where any retraction is the constant map to `1`.
    pub retraction: RetractionParams,
    /// `(sigma(0), sigma(1))` and `(tau(0), tau(1))`.
    pub sigma_range: (f64, f64),
    pub tau_range: (f64, f64),
    /// Whether a `tau` endpoint was capped at `1/2`.
    pub tau_clamped: bool,
}

impl DeformationParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return Err(params("deformation homotopy needs n >= 1"));
        }
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(params(format!("deformation homotopy needs 0 < eps <= 1/2, got {eps}")));
        }
        let pow = |k: i32| eps.powi(k);
        let n_i = n as i32;
        let raw_tau = (pow(n_i - 2), pow(n_i - 1));
        let tau_range = (raw_tau.0.min(0.5), raw_tau.1.min(0.5));
        let sigma_range = (pow(n_i - 1), pow(n_i));
        let retraction = if n == 1 {
            RetractionParams::from_eps(1, 0.25)?
        } else {
            RetractionParams::from_eps(n, pow(n_i - 1))?
        };
        // the smash parameters must stay ordered along the whole path
        if n >= 2 {
            SmashParams::new(sigma_range.0, tau_range.0)
                .and_then(|_| SmashParams::new(sigma_range.1, tau_range.1))
                .map_err(|e| domain(format!("eps={eps} is too large for n={n}: {e}")))?;
        }
        Ok(Self {
            n,
            eps,
            retraction,
            sigma_range,
            tau_range,
            tau_clamped: raw_tau != tau_range,
        })
    }
}

/// `h(s, t, u) = (1 - u)(s, t) + u R(T^{n-1}_{sigma(t),tau(t)}(s), t)` where
/// `sigma(t)` moves from `eps^{n-1}` to `eps^n` and `tau(t)` from `eps^{n-2}`
/// to `eps^{n-1}` (both capped at `1/2`) with weight `lambda(t/eps^n)`.
///
/// `h_0` is the identity and `h_1` an `eps^{n-1}`-approximate retraction
/// onto `J^{n-1}`.
pub fn deformation_retraction_homotopy(n: usize, eps: f64) -> Result<Homotopy> {
    let d = DeformationParams::new(n, eps)?;
    let retraction = approx_retraction(&d.retraction)?;
    // coordinates on I^n × I: (s_1..s_{n-1}, t, u)
    let t = SmoothMap::coord(n + 1, n - 1)?;
    let w = t.scale_shift(1.0 / eps.powi(n as i32), 0.0)?.then(SmoothMap::lambda(1))?;
    let path = |(a, b): (f64, f64)| w.scale_shift(b - a, a);
    let (sigma, tau) = (path(d.sigma_range)?, path(d.tau_range)?);
    let mut args = Vec::with_capacity(n);
    for k in 0..n - 1 {
        let s = SmoothMap::coord(n + 1, k)?;
        args.push(SmoothMap::tuple(vec![sigma.clone(), tau.clone(), s])?.then(SmoothMap::smash_dyn())?);
    }
    args.push(t);
    let end = SmoothMap::tuple(args)?.then(retraction)?;
    let start = SmoothMap::tuple(
        (0..n)
            .map(|k| SmoothMap::coord(n + 1, k))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let map = blend(start, end)?.on_cube();
    Homotopy::new(map, Domain::Complex(CubicalComplex::full(n)))
}

/// `F(t, u) = (1 - u) t + u T^n_{eps,tau}(t)`, from the identity to the
/// smash map.
pub fn straight_line_homotopy(n: usize, eps: f64, tau: f64) -> Result<Homotopy> {
    let smash = SmoothMap::smash(SmashParams::new(eps, tau)?, n);
    let x = SmoothMap::tuple(
        (0..n)
            .map(|k| SmoothMap::coord(n + 1, k))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let map = blend(x.clone(), x.then(smash)?)?.on_cube();
    Homotopy::new(map, Domain::Complex(CubicalComplex::full(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubelat::{chamber_region, MEMBERSHIP_TOL};
    use crate::tame::max_gap;

    fn j_dist(p: &[f64]) -> f64 {
        // distance to J^{n-1} = boundary minus the open bottom face
        let n = p.len();
        let mut d = (1.0 - p[n - 1]).abs();
        for &x in &p[..n - 1] {
            d = d.min(x.abs()).min((1.0 - x).abs());
        }
        d
    }

    #[test]
    fn invalid_orderings_are_rejected() {
        assert!(RetractionParams::new(2, 0.3, 0.1, 0.35).is_err());
        assert!(RetractionParams::new(2, 0.3, 0.2, 0.1).is_err());
        assert!(RetractionParams::new(2, 0.5, 0.1, 0.2).is_err());
        assert!(RetractionParams::new(0, 0.3, 0.1, 0.2).is_err());
        assert!(RetractionParams::from_eps(3, 0.4).is_ok());
    }

    #[test]
    fn spec_examples() {
        let p = RetractionParams::from_eps(2, 0.3).unwrap();
        let r = approx_retraction(&p).unwrap();
        assert_eq!(r.eval(&[0.5, 1.0]).unwrap(), vec![0.5, 1.0]);
        for &t in &[0.0, 0.2, 0.5, 0.97] {
            assert_eq!(r.eval(&[t, 0.9]).unwrap()[1], 1.0);
        }
        // t deep inside the bottom: v = T(u) + T(1-u)
        for &u in &[0.0, 0.05, 0.1, 0.13] {
            let v = r.eval(&[0.5, u]).unwrap()[1];
            assert!((v - 1.0).abs() < 1e-12, "u={u}: {v}");
        }
    }

    #[test]
    fn n1_is_constant() {
        let r = approx_retraction(&RetractionParams::from_eps(1, 0.2).unwrap()).unwrap();
        for &u in &[0.0, 0.3, 1.0] {
            assert_eq!(r.eval(&[u]).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn image_in_j_and_chamber_fixed() {
        let p = RetractionParams::from_eps(3, 0.25).unwrap();
        let r = approx_retraction(&p).unwrap();
        let cube = Domain::Complex(CubicalComplex::full(3));
        for x in cube.grid_points(11) {
            assert!(j_dist(&r.eval(&x).unwrap()) <= 1e-9, "{x:?}");
        }
        let chamber = chamber_region(&CubicalComplex::j_complex(3).unwrap(), 0.25).unwrap();
        for x in Domain::Boxes(chamber).grid_points(9) {
            assert!(max_gap(&r.eval(&x).unwrap(), &x) <= 1e-12, "{x:?}");
        }
    }

    #[test]
    fn deformation_endpoints() {
        for n in 1..=3 {
            let h = deformation_retraction_homotopy(n, 0.3).unwrap();
            let cube = Domain::Complex(CubicalComplex::full(n));
            for x in cube.grid_points(7) {
                assert!(max_gap(&h.eval(&x, 0.0).unwrap(), &x) <= 1e-12);
                let y = h.eval(&x, 1.0).unwrap();
                assert!(j_dist(&y) <= 1e-9, "n={n} {x:?} -> {y:?}");
                assert!(cube.contains(&y, MEMBERSHIP_TOL));
            }
        }
        assert!(deformation_retraction_homotopy(2, 0.5).is_err());
        assert!(DeformationParams::new(2, 0.3).unwrap().tau_clamped);
        assert!(!DeformationParams::new(3, 0.3).unwrap().tau_clamped);
    }

    #[test]
    fn straight_line_ends_at_smash() {
        let h = straight_line_homotopy(2, 0.1, 0.3).unwrap();
        assert_eq!(h.eval(&[0.05, 0.5], 0.0).unwrap(), vec![0.05, 0.5]);
        assert_eq!(h.eval(&[0.05, 0.5], 1.0).unwrap(), vec![0.0, 0.5]);
    }
}
