//! Scalar building blocks: the flat function `gamma`, the smooth step
//! `lambda`, and the smash function `T_{sigma,tau}` with its integral
//! auxiliary `F`.
//!
//! Every integral `F` needs is a rescaling of the single primitive
//! `L(s) = int_0^s lambda`, so the quadrature is memoized once as a table of
//! panel sums on `[0, 1]`; a call only integrates the partial panel it lands
//! in.

mod quad;

use std::sync::OnceLock;

pub use quad::{adaptive_simpson, QuadratureConfig};

use crate::error::{domain, params, Error, Result};

fn finite(t: f64, what: &str) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{what}: non-finite argument {t}")))
    }
}

/// `exp(-1/t)` for `t > 0`, zero otherwise.
pub fn gamma(t: f64) -> Result<f64> {
    finite(t, "gamma")?;
    Ok(gamma_raw(t))
}

#[inline]
pub(crate) fn gamma_raw(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step `gamma(t) / (gamma(t) + gamma(1 - t))`: zero for `t <= 0`, one
/// for `t >= 1`, and `lambda(1 - t) = 1 - lambda(t)`.
pub fn lambda(t: f64) -> Result<f64> {
    finite(t, "lambda")?;
    Ok(lambda_raw(t))
}

#[inline]
pub(crate) fn lambda_raw(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        // gamma(t)/(gamma(t)+gamma(1-t)) without the underflow of either term
        let x = 1.0 / t - 1.0 / (1.0 - t);
        1.0 / (1.0 + x.exp())
    }
}

/// Parameters of the smash function, `0 <= sigma < tau <= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SmashParams {
    sigma: f64,
    tau: f64,
}

impl SmashParams {
    pub fn new(sigma: f64, tau: f64) -> Result<Self> {
        if !(sigma.is_finite() && tau.is_finite()) || !(0.0 <= sigma && sigma < tau && tau <= 0.5)
        {
            return Err(params(format!(
                "smash function needs 0 <= sigma < tau <= 1/2, got sigma={sigma}, tau={tau}"
            )));
        }
        Ok(Self { sigma, tau })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

const PANELS: usize = 256;

/// Cumulative `int_0^{k/PANELS} lambda` for `k = 0..=PANELS`.
fn primitive_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let q = QuadratureConfig {
            abs_tol: 1e-16,
            max_depth: 50,
        };
        let h = 1.0 / PANELS as f64;
        let mut acc = 0.0;
        let mut table = Vec::with_capacity(PANELS + 1);
        table.push(0.0);
        for k in 0..PANELS {
            let a = k as f64 * h;
            let b = (k + 1) as f64 * h;
            acc += adaptive_simpson(lambda_raw, a, b, &q)
                .expect("lambda panels converge at depth 50");
            table.push(acc);
        }
        table
    })
}

/// `int_0^s lambda(x) dx`.
fn lambda_primitive(s: f64, q: &QuadratureConfig) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    if s >= 1.0 {
        // lambda(1-x) = 1 - lambda(x) puts the unit integral at exactly 1/2
        return Ok(0.5 + (s - 1.0));
    }
    let table = primitive_table();
    let scaled = s * PANELS as f64;
    let k = (scaled.floor() as usize).min(PANELS - 1);
    let a = k as f64 / PANELS as f64;
    Ok(table[k] + adaptive_simpson(lambda_raw, a, s, q)?)
}

/// `F(t) = int_0^t lambda((tau x - sigma)/(tau - sigma)) dx
///        + (tau + sigma)/(2 tau) * lambda((tau t - sigma)/(tau - sigma))`.
///
/// Zero for `t <= sigma/tau` and equal to `t` for `t >= 1`; both ranges skip
/// the quadrature.
pub fn smash_f(p: SmashParams, t: f64, q: &QuadratureConfig) -> Result<f64> {
    finite(t, "smash_f")?;
    let SmashParams { sigma, tau } = p;
    if tau * t <= sigma {
        return Ok(0.0);
    }
    if t >= 1.0 {
        return Ok(t);
    }
    let width = tau - sigma;
    let s = (tau * t - sigma) / width;
    // x -> (tau x - sigma)/width has slope tau/width
    let integral = width / tau * lambda_primitive(s, q)?;
    Ok(integral + (tau + sigma) / (2.0 * tau) * lambda_raw(s))
}

/// The smash function `T_{sigma,tau}`: zero on `t <= sigma`, identity on
/// `[tau, 1 - tau]`, one on `t >= 1 - sigma`, and `T(1 - t) = 1 - T(t)`.
pub fn smash_t(p: SmashParams, t: f64, q: &QuadratureConfig) -> Result<f64> {
    finite(t, "smash_t")?;
    let SmashParams { sigma, tau } = p;
    if t <= sigma {
        return Ok(0.0);
    }
    if t >= 1.0 - sigma {
        return Ok(1.0);
    }
    if tau <= t && t <= 1.0 - tau {
        return Ok(t);
    }
    // F is rescaled by tau so that the identity band is t, not t/tau
    let v = if t <= 0.5 {
        tau * smash_f(p, t / tau, q)?
    } else {
        1.0 - tau * smash_f(p, (1.0 - t) / tau, q)?
    };
    Ok(v.clamp(0.0, 1.0))
}

/// `T_{sigma,tau}(t)` with parameters that are themselves computed values.
/// Validates the ordering on every call.
pub(crate) fn smash_t_dyn(sigma: f64, tau: f64, t: f64) -> Result<f64> {
    let p = SmashParams::new(sigma, tau).map_err(|e| match e {
        Error::Params(m) => domain(m),
        other => other,
    })?;
    smash_t(p, t, &QuadratureConfig::default())
}
