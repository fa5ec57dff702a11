//! Tameness and admissibility checks, and the constructions that produce
//! tame maps: taming by the smash function, tame extension over `I^n`, the
//! extension to `J^{n-1}_delta`, and concatenation of maps and homotopies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cubelat::{self, BoxRegion, CubicalComplex, Domain, Face, MEMBERSHIP_TOL};
use crate::error::{domain, params, Error, Result};
use crate::fnexpr::{seam_check, Homotopy, SeamReport, SmoothMap, DEFAULT_FD_STEP};
use crate::kernels::SmashParams;
use crate::retract::{approx_retraction, RetractionParams};

/// Tolerances and sampling density shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceConfig {
    pub eq_tol: f64,
    pub deriv_tol: f64,
    pub grid_res: usize,
    pub seed: u64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eq_tol: 1e-9,
            deriv_tol: 1e-6,
            grid_res: 33,
            seed: 0x7a3e,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eq_tol > 0.0 && self.deriv_tol > 0.0) || self.grid_res < 3 {
            return Err(params(format!(
                "tolerances must be positive and grid_res >= 3, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn with_grid(self, grid_res: usize) -> Self {
        Self { grid_res, ..self }
    }
}

/// Where a tameness condition failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub axis: usize,
    pub alpha: u8,
}

/// Outcome of a tameness, admissibility or fiber check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TamenessReport {
    pub passed: bool,
    #[serde(rename = "eps")]
    pub eps_tested: f64,
    #[serde(rename = "worst")]
    pub worst_violation: f64,
    pub witness: Option<Witness>,
    #[serde(rename = "samples")]
    pub samples_checked: usize,
}

impl TamenessReport {
    fn empty(eps: f64) -> Self {
        Self {
            passed: true,
            eps_tested: eps,
            worst_violation: 0.0,
            witness: None,
            samples_checked: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(domain(format!("tameness threshold must lie in (0, 1/2], got {eps}")));
    }
    Ok(())
}

fn check_dims(f: &SmoothMap, k: &Domain) -> Result<()> {
    if f.in_dim() != k.ambient_dim() {
        return Err(Error::Dimension {
            node: "check".into(),
            message: format!(
                "map takes {} inputs but the domain lives in I^{}",
                f.in_dim(),
                k.ambient_dim()
            ),
        });
    }
    Ok(())
}

pub(crate) fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Grid points plus `grid_res` seeded random points per maximal piece.
pub fn sample_points(k: &Domain, cfg: &ToleranceConfig) -> Vec<Vec<f64>> {
    let mut pts = k.grid_points(cfg.grid_res);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    pts.extend(k.random_points(cfg.grid_res, &mut rng));
    pts
}

/// Per-sample worst finding, reduced in sample order so the result does not
/// depend on scheduling.
type Finding = Option<(f64, Witness)>;

fn reduce(findings: Vec<Finding>, eps: f64, eq_tol: f64, samples: usize) -> TamenessReport {
    let mut report = TamenessReport::empty(eps);
    report.samples_checked = samples;
    for (v, w) in findings.into_iter().flatten() {
        if v > report.worst_violation || (report.witness.is_none() && v > eq_tol) {
            report.worst_violation = v;
            report.witness = Some(w);
        }
    }
    report.passed = report.worst_violation <= eq_tol;
    if report.passed {
        report.witness = None;
    }
    report
}

/// Checks `f(P) = f(pi_j^alpha(P))` for every sample `P` of `k`, every axis
/// `j` and `alpha` with `|t_j - alpha| <= eps` and the projection inside `k`.
pub fn check_tame(
    f: &SmoothMap,
    k: &Domain,
    eps: f64,
    cfg: &ToleranceConfig,
) -> Result<TamenessReport> {
    check_eps(eps)?;
    cfg.validate()?;
    check_dims(f, k)?;
    let pts = sample_points(k, cfg);
    let findings = pts
        .par_iter()
        .map(|p| -> Result<Finding> {
            let mut best: Finding = None;
            let mut here: Option<Vec<f64>> = None;
            for (axis, &x) in p.iter().enumerate() {
                for alpha in 0..=1u8 {
                    let depth = (x - f64::from(alpha)).abs();
                    if depth > eps || depth == 0.0 {
                        continue;
                    }
                    let q = cubelat::face_projection(p, axis, alpha)?;
                    if !k.contains(&q, MEMBERSHIP_TOL) {
                        continue;
                    }
                    if here.is_none() {
                        here = Some(f.eval(p)?);
                    }
                    let v = max_gap(here.as_ref().unwrap(), &f.eval(&q)?);
                    if best.as_ref().map_or(true, |(b, _)| v > *b) {
                        best = Some((
                            v,
                            Witness {
                                point: p.clone(),
                                axis,
                                alpha,
                            },
                        ));
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(findings, eps, cfg.eq_tol, pts.len()))
}

/// Runs [`check_tame`] on `k ∩ F` at threshold `eps^{dim F}` for every
/// positive-dimensional face `F` of `I^n` and merges the results.
pub fn check_admissible(
    f: &SmoothMap,
    k: &Domain,
    eps: f64,
    cfg: &ToleranceConfig,
) -> Result<TamenessReport> {
    check_eps(eps)?;
    check_dims(f, k)?;
    let n = k.ambient_dim();
    let mut out = TamenessReport::empty(eps);
    for face in Face::full(n).subfaces() {
        let d = face.dim();
        if d == 0 {
            continue;
        }
        let piece = k.intersect_face(&face);
        if piece.is_empty() {
            continue;
        }
        let r = check_tame(f, &piece, eps.powi(d as i32), cfg)?;
        out.samples_checked += r.samples_checked;
        if r.worst_violation > out.worst_violation {
            out.worst_violation = r.worst_violation;
            out.witness = r.witness;
        }
    }
    out.passed = out.worst_violation <= cfg.eq_tol;
    if out.passed {
        out.witness = None;
    }
    Ok(out)
}

/// Certifies that `f` factors through `T^n_{eps,tau}`: moving any coordinate
/// inside the interval `T` collapses (`[0, eps]` or `[1 - eps, 1]`) must not
/// change the value.
pub fn check_fiber_constant(
    f: &SmoothMap,
    eps: f64,
    tau: f64,
    cfg: &ToleranceConfig,
) -> Result<TamenessReport> {
    SmashParams::new(eps, tau)?;
    check_eps(eps)?;
    cfg.validate()?;
    let n = f.in_dim();
    let cube = Domain::Complex(CubicalComplex::full(n));
    let pts = sample_points(&cube, cfg);
    let findings = pts
        .par_iter()
        .enumerate()
        .map(|(i, p)| -> Result<Finding> {
            let here = f.eval(p)?;
            let mut best: Finding = None;
            // deterministic per-sample perturbation
            let jitter = ((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 11) as f64
                / (1u64 << 53) as f64;
            for (axis, &x) in p.iter().enumerate() {
                for alpha in 0..=1u8 {
                    if (x - f64::from(alpha)).abs() > eps {
                        continue;
                    }
                    for depth in [0.0, 0.5 * eps, eps, jitter * eps] {
                        let mut q = p.clone();
                        q[axis] = if alpha == 0 { depth } else { 1.0 - depth };
                        let v = max_gap(&here, &f.eval(&q)?);
                        if best.as_ref().map_or(true, |(b, _)| v > *b) {
                            best = Some((
                                v,
                                Witness {
                                    point: p.clone(),
                                    axis,
                                    alpha,
                                },
                            ));
                        }
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(findings, eps, cfg.eq_tol, pts.len()))
}

/// Largest value discrepancy between `f` and `g` over `points`.
pub fn max_discrepancy(f: &SmoothMap, g: &SmoothMap, points: &[Vec<f64>]) -> Result<f64> {
    let gaps = points
        .par_iter()
        .map(|p| Ok(max_gap(&f.eval(p)?, &g.eval(p)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

fn time_coord(n: usize) -> Result<SmoothMap> {
    SmoothMap::coord(n + 1, n)
}

fn space_coords(n: usize) -> Result<SmoothMap> {
    SmoothMap::tuple((0..n).map(|k| SmoothMap::coord(n + 1, k)).collect::<Result<Vec<_>>>()?)
}

/// `(1 - u) · a + u · b` for maps `a`, `b` on `I^n × I`.
pub(crate) fn blend(a: SmoothMap, b: SmoothMap) -> Result<SmoothMap> {
    let n = a.in_dim() - 1;
    let u = time_coord(n)?;
    let one_minus_u = u.scale_shift(-1.0, 1.0)?;
    SmoothMap::sum(vec![
        SmoothMap::product(vec![one_minus_u, a])?,
        SmoothMap::product(vec![u, b])?,
    ])
}

/// Replaces `f` on `k` by the `sigma`-tame map `g = f ∘ T^n_{sigma,eps}` and
/// returns the homotopy `(v, u) -> f((1 - u) v + u T^n(v))`, which is
/// stationary on `k(eps)` and on any subcomplex where `f` is already
/// `eps`-tame.
pub fn tame_replace(
    f: &SmoothMap,
    k: &CubicalComplex,
    sigma: f64,
    eps: f64,
) -> Result<(SmoothMap, Homotopy)> {
    if !(0.0 < sigma && sigma < eps && eps <= 0.5) {
        return Err(params(format!(
            "taming needs 0 < sigma < eps <= 1/2, got sigma={sigma}, eps={eps}"
        )));
    }
    let n = k.ambient_dim();
    if f.in_dim() != n {
        return Err(Error::Dimension {
            node: "tame_replace".into(),
            message: format!("map takes {} inputs, complex lives in I^{n}", f.in_dim()),
        });
    }
    let smash = SmoothMap::smash(SmashParams::new(sigma, eps)?, n);
    let g = SmoothMap::compose(f.clone(), smash.clone())?.on_cube();
    let v = space_coords(n)?;
    let path = blend(v.clone(), v.then(smash)?)?;
    let h = SmoothMap::compose(f.clone(), path)?.on_cube();
    Ok((g, Homotopy::new(h, Domain::Complex(k.clone()))?))
}

/// Parameters of a tame extension from `J^{n-1}` to `I^n`.
///
/// The input map must be `eps`-tame on `J^{n-1}` and `eps_prime`-tame on the
/// bottom rim `∂I^{n-1} × {0}`; the extension is `sigma`-tame on `I^n` and
/// `sigma_prime`-tame on the bottom face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtensionParams {
    pub eps: f64,
    pub sigma: f64,
    pub eps_prime: f64,
    pub sigma_prime: f64,
}

impl ExtensionParams {
    pub fn new(eps: f64, sigma: f64, eps_prime: f64, sigma_prime: f64) -> Result<Self> {
        let p = Self {
            eps,
            sigma,
            eps_prime,
            sigma_prime,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for an input that is only known to be `eps`-tame.
    ///
    /// The bottom rim is then `eps`-tame too, so it plays the role of
    /// `eps_prime` and the working threshold drops to `(sigma + eps)/2`.
    pub fn from_tameness(eps: f64, sigma: f64) -> Result<Self> {
        if !(0.0 < sigma && sigma < eps && eps <= 0.5) {
            return Err(params(format!(
                "extension needs 0 < sigma < eps <= 1/2, got sigma={sigma}, eps={eps}"
            )));
        }
        let working = 0.5 * (sigma + eps);
        Self::new(working, sigma, eps, 0.5 * (sigma + working))
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            eps,
            sigma,
            eps_prime,
            sigma_prime,
        } = *self;
        if !(0.0 < sigma && sigma < eps && eps < eps_prime && eps_prime <= 0.5) {
            return Err(params(format!(
                "extension needs 0 < sigma < eps < eps' <= 1/2, got {self:?}"
            )));
        }
        if !(sigma < sigma_prime && sigma_prime < eps_prime) {
            return Err(params(format!(
                "extension needs sigma < sigma' < eps', got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Where the smash parameters applied to the first `n - 1` coordinates move
/// from `(sigma', eps')` to `(sigma, eps)` as the last coordinate grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BlendWindow {
    /// `u ∈ [0, sigma]`, weight `lambda(1 - u/sigma)`.
    #[cfg_attr(not(test), allow(dead_code))]
    Collar,
    /// `u ∈ [sigma, eps]`, weight `lambda((eps - u)/(eps - sigma))`.
    AboveCollar,
}

/// Extends a tame map on `J^{n-1}` to a `sigma`-tame map on `I^n`:
///
/// `g(t, u) = f(R_eps(T_{a(u),b(u)}(t_1), .., T_{a(u),b(u)}(t_{n-1}), T_{sigma,eps}(u)))`
///
/// with `(a, b)` equal to `(sigma', eps')` for `u <= sigma` and to
/// `(sigma, eps)` for `u >= eps`.
///
/// Both tameness hypotheses are checked on the `cfg` grid first.
pub fn extend_tame(
    f: &SmoothMap,
    p: &ExtensionParams,
    cfg: &ToleranceConfig,
) -> Result<SmoothMap> {
    p.validate()?;
    let n = f.in_dim();
    if n == 0 {
        return Err(domain("extension needs n >= 1"));
    }
    let j = Domain::Complex(CubicalComplex::j_complex(n)?);
    let r = check_tame(f, &j, p.eps, cfg)?;
    if !r.passed {
        return Err(Error::Precondition(format!(
            "input is not {}-tame on J^{} (violation {:e} at {:?})",
            p.eps,
            n - 1,
            r.worst_violation,
            r.witness
        )));
    }
    if n >= 2 {
        let rim = Domain::Complex(CubicalComplex::bottom_rim(n)?);
        let r = check_tame(f, &rim, p.eps_prime, cfg)?;
        if !r.passed {
            return Err(Error::Precondition(format!(
                "input is not {}-tame on the bottom rim (violation {:e})",
                p.eps_prime, r.worst_violation
            )));
        }
    }
    extension_map(f, p, BlendWindow::AboveCollar)
}

/// The extension formula without the hypothesis checks.
pub(crate) fn extension_map(
    f: &SmoothMap,
    p: &ExtensionParams,
    window: BlendWindow,
) -> Result<SmoothMap> {
    let n = f.in_dim();
    let ExtensionParams {
        eps,
        sigma,
        eps_prime,
        sigma_prime,
    } = *p;
    let u = SmoothMap::coord(n, n - 1)?;
    let weight = match window {
        BlendWindow::Collar => u.scale_shift(-1.0 / sigma, 1.0)?,
        BlendWindow::AboveCollar => u.scale_shift(-1.0 / (eps - sigma), eps / (eps - sigma))?,
    }
    .then(SmoothMap::lambda(1))?;
    let a = weight.scale_shift(sigma_prime - sigma, sigma)?;
    let b = weight.scale_shift(eps_prime - eps, eps)?;
    let mut args = Vec::with_capacity(n);
    for k in 0..n - 1 {
        let tk = SmoothMap::coord(n, k)?;
        args.push(SmoothMap::tuple(vec![a.clone(), b.clone(), tk])?.then(SmoothMap::smash_dyn())?);
    }
    args.push(u.then(SmoothMap::smash(SmashParams::new(sigma, eps)?, 1))?);
    let retraction = approx_retraction(&RetractionParams::from_eps(n, eps)?)?;
    let g = SmoothMap::tuple(args)?.then(retraction)?.then(f.clone())?;
    Ok(g.on_cube())
}

/// Extends an `eps`-admissible map on `J^{n-1}` over the bottom collar of
/// `J^{n-1}_delta`, `delta = eps^{n-1}`, by
/// `f_eps(t, 0) = f(T^{n-1}_{eps^{n-1}, eps^{n-2}}(t), 0)`.
///
/// `eps^{n-2}` is capped at `1/2`. Returns the map and its region.
pub fn extend_to_jdelta(
    f: &SmoothMap,
    eps: f64,
    cfg: &ToleranceConfig,
) -> Result<(SmoothMap, BoxRegion)> {
    check_eps(eps)?;
    let n = f.in_dim();
    let j = CubicalComplex::j_complex(n)?;
    let jd = Domain::Complex(j.clone());
    let r = check_admissible(f, &jd, eps, cfg)?;
    if !r.passed {
        return Err(Error::Precondition(format!(
            "input is not {eps}-admissible on J^{} (violation {:e})",
            n - 1,
            r.worst_violation
        )));
    }
    if n == 1 {
        // (delta, 1 - delta)^0 × {0} is the whole bottom, J^0_delta = J^0
        let region = BoxRegion::new(1, vec![vec![(1.0, 1.0)]])?;
        return Ok((f.clone(), region));
    }
    let delta = eps.powi(n as i32 - 1);
    let tau = eps.powi(n as i32 - 2).min(0.5);
    let region = cubelat::j_delta_region(n, delta)?;
    let smash = SmoothMap::smash(SmashParams::new(delta, tau)?, 1);
    let mut args = Vec::with_capacity(n);
    for k in 0..n - 1 {
        args.push(SmoothMap::coord(n, k)?.then(smash.clone())?);
    }
    args.push(SmoothMap::constant(n, vec![0.0])?);
    let bottom = SmoothMap::tuple(args)?.then(f.clone())?;
    let mut faces: Vec<Face> = j.maximal_faces().to_vec();
    let mut pieces = vec![f.clone(); faces.len()];
    faces.push(Face::new(n, &[(n - 1, 0)])?);
    pieces.push(bottom);
    Ok((SmoothMap::glue(faces, pieces)?, region))
}

/// Grid of base points with an extra time coordinate appended.
pub fn cylinder_points(base: &Domain, cfg: &ToleranceConfig, u: f64) -> Vec<Vec<f64>> {
    sample_points(base, cfg)
        .into_iter()
        .map(|mut p| {
            p.push(u);
            p
        })
        .collect()
}

/// `F * G`: `F(x, lambda(3t))` for `t <= 1/2`, `G(x, lambda(3t - 2))` after.
pub fn concat_homotopy(f: &Homotopy, g: &Homotopy, cfg: &ToleranceConfig) -> Result<Homotopy> {
    if f.base() != g.base() || f.map().out_dim() != g.map().out_dim() {
        return Err(domain("concatenated homotopies must share base and target"));
    }
    let n = f.base_dim();
    let pts = sample_points(f.base(), cfg);
    let end = f.slice(1.0)?;
    let start = g.slice(0.0)?;
    let gap = max_discrepancy(&end, &start, &pts)?;
    if gap > cfg.eq_tol {
        return Err(Error::Precondition(format!(
            "end of the first homotopy differs from the start of the second by {gap:e}"
        )));
    }
    let t = time_coord(n)?;
    let reparam = |a: f64, b: f64| -> Result<SmoothMap> {
        let mut parts = (0..n)
            .map(|k| SmoothMap::coord(n + 1, k))
            .collect::<Result<Vec<_>>>()?;
        parts.push(t.scale_shift(a, b)?.then(SmoothMap::lambda(1))?);
        SmoothMap::tuple(parts)
    };
    let left = reparam(3.0, 0.0)?.then(f.map().clone())?;
    let right = reparam(3.0, -2.0)?.then(g.map().clone())?;
    let map = SmoothMap::piecewise(n, vec![0.5], vec![left, right])?;
    Homotopy::new(map, f.base().clone())
}

/// `phi * psi` on `I^n`, the composition law of cubes: `phi(lambda(3t_1), ..)`
/// for `t_1 <= 1/2`, `psi(lambda(3t_1 - 2), ..)` after.
pub fn concat_maps(phi: &SmoothMap, psi: &SmoothMap, cfg: &ToleranceConfig) -> Result<SmoothMap> {
    let n = phi.in_dim();
    if psi.in_dim() != n || psi.out_dim() != phi.out_dim() || n == 0 {
        return Err(domain("concatenated maps must share domain and target"));
    }
    let seam = Domain::Complex(CubicalComplex::single(Face::new(n, &[(0, 0)])?));
    let pts = sample_points(&seam, cfg);
    let mut gap: f64 = 0.0;
    for p in &pts {
        let mut q = p.clone();
        q[0] = 1.0;
        gap = gap.max(max_gap(&phi.eval(&q)?, &psi.eval(p)?));
    }
    if gap > cfg.eq_tol {
        return Err(Error::Precondition(format!(
            "phi on t_1 = 1 differs from psi on t_1 = 0 by {gap:e}"
        )));
    }
    let reparam = |a: f64, b: f64| -> Result<SmoothMap> {
        let mut parts = vec![SmoothMap::coord(n, 0)?
            .scale_shift(a, b)?
            .then(SmoothMap::lambda(1))?];
        for k in 1..n {
            parts.push(SmoothMap::coord(n, k)?);
        }
        SmoothMap::tuple(parts)
    };
    let left = reparam(3.0, 0.0)?.then(phi.clone())?;
    let right = reparam(3.0, -2.0)?.then(psi.clone())?;
    Ok(SmoothMap::piecewise(0, vec![0.5], vec![left, right])?.on_cube())
}

/// Seam report of a concatenated homotopy at `t = 1/2` over its base grid.
pub fn homotopy_seam(h: &Homotopy, cfg: &ToleranceConfig) -> Result<SeamReport> {
    let pts = cylinder_points(h.base(), cfg, 0.5);
    seam_check(h.map(), &pts, DEFAULT_FD_STEP)
}
