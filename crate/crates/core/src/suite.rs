//! Verification batteries, their JSON report, and CSV sampling of maps.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cubelat::{chamber_region, j_delta_region, BoxRegion, CubicalComplex, Domain, Face};
use crate::error::{params, Error, Result};
use crate::fnexpr::{parse_map, seam_check, Homotopy, SmoothMap, DEFAULT_FD_STEP};
use crate::kernels::{lambda, smash_f, smash_t, QuadratureConfig, SmashParams};
use crate::replace::admissible_replace;
use crate::retract::{
    approx_retraction, deformation_retraction_homotopy, DeformationParams, RetractionParams,
};
use crate::tame::{
    check_admissible, check_fiber_constant, check_tame, concat_homotopy, concat_maps,
    extend_tame, extend_to_jdelta, homotopy_seam, max_discrepancy, max_gap, sample_points,
    tame_replace, ExtensionParams, ToleranceConfig,
};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Version of the JSON report layout; appears as `"schema"` in every report.
pub fn report_schema_version() -> &'static str {
    SCHEMA_VERSION
}

/// Largest ambient dimension a suite accepts.
pub const MAX_DIM: usize = 4;

/// `(sigma, tau)` pairs exercised by the kernel battery.
pub const KERNEL_PAIRS: [(f64, f64); 5] = [(0.0, 0.3), (0.05, 0.5), (0.1, 0.25), (0.1, 0.3), (0.2, 0.4)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernels,
    Retract,
    Tame,
    Replace,
    Concat,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["kernels", "retract", "tame", "replace", "concat", "all"];

    fn default_ns(self) -> Vec<usize> {
        match self {
            Suite::Replace => vec![2, 3],
            Suite::Concat => vec![1, 2],
            _ => vec![1, 2, 3],
        }
    }

    fn default_eps(self) -> Vec<f64> {
        match self {
            Suite::Replace => vec![0.2],
            Suite::Concat => vec![0.25],
            _ => vec![0.1, 0.25, 0.4],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "kernels" => Suite::Kernels,
            "retract" => Suite::Retract,
            "tame" => Suite::Tame,
            "replace" => Suite::Replace,
            "concat" => Suite::Concat,
            "all" => Suite::All,
            _ => {
                return Err(params(format!(
                    "unknown suite {s:?}, expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

/// What to run. Empty `ns` or `eps` lists mean each battery's defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub ns: Vec<usize>,
    pub eps: Vec<f64>,
    pub tol: ToleranceConfig,
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        Self {
            suite,
            ns: Vec::new(),
            eps: Vec::new(),
            tol: ToleranceConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if let Some(n) = self.ns.iter().find(|&&n| n == 0 || n > MAX_DIM) {
            return Err(params(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
            return Err(params(format!("eps {e} outside (0, 1/2)")));
        }
        Ok(())
    }

    fn ns_for(&self, s: Suite) -> Vec<usize> {
        if self.ns.is_empty() {
            s.default_ns()
        } else {
            self.ns.clone()
        }
    }

    fn eps_for(&self, s: Suite) -> Vec<f64> {
        if self.eps.is_empty() {
            s.default_eps()
        } else {
            self.eps.clone()
        }
    }
}

/// One checked property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub suite: &'static str,
    pub property: &'static str,
    pub params: Value,
    /// `None` when the check itself errored.
    pub worst: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: &'static str,
    pub suite: Suite,
    pub seed: u64,
    pub config: SuiteConfig,
    pub passed: bool,
    pub failures: usize,
    pub results: Vec<PropertyResult>,
}

impl SuiteReport {
    /// Process exit code: 0 when every property holds, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.passed)
    }

    /// Pretty JSON with a trailing `timestamp` field, which is the only part
    /// that differs between runs of the same configuration.
    pub fn to_json(&self, timestamp: u64) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["timestamp"] = json!(timestamp);
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Outcome of one check: worst observed value, the bound it must meet, and
/// an optional remark.
struct Outcome {
    worst: f64,
    tolerance: f64,
    note: Option<String>,
    /// Overrides `worst <= tolerance` for properties that are expected
    /// failures or yes/no facts.
    passed: Option<bool>,
}

impl Outcome {
    fn within(worst: f64, tolerance: f64) -> Self {
        Self {
            worst,
            tolerance,
            note: None,
            passed: None,
        }
    }

    fn flag(ok: bool) -> Self {
        Self {
            worst: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            note: None,
            passed: Some(ok),
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

struct Battery {
    suite: &'static str,
    rows: Vec<PropertyResult>,
}

impl Battery {
    fn new(suite: &'static str) -> Self {
        Self {
            suite,
            rows: Vec::new(),
        }
    }

    fn check(&mut self, property: &'static str, params: Value, run: impl FnOnce() -> Result<Outcome>) {
        let row = match run() {
            Ok(o) => PropertyResult {
                suite: self.suite,
                property,
                params,
                worst: Some(o.worst),
                tolerance: o.tolerance,
                passed: o.passed.unwrap_or(o.worst <= o.tolerance),
                note: o.note,
            },
            Err(e) => PropertyResult {
                suite: self.suite,
                property,
                params,
                worst: None,
                tolerance: 0.0,
                passed: false,
                note: Some(e.to_string()),
            },
        };
        self.rows.push(row);
    }
}

/// Runs the configured batteries in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let order: &[Suite] = match cfg.suite {
        Suite::All => &[Suite::Kernels, Suite::Retract, Suite::Tame, Suite::Replace, Suite::Concat],
        Suite::Kernels => &[Suite::Kernels],
        Suite::Retract => &[Suite::Retract],
        Suite::Tame => &[Suite::Tame],
        Suite::Replace => &[Suite::Replace],
        Suite::Concat => &[Suite::Concat],
    };
    let mut results = Vec::new();
    for &s in order {
        let rows = match s {
            Suite::Kernels => kernels_battery(cfg),
            Suite::Retract => retract_battery(cfg),
            Suite::Tame => tame_battery(cfg),
            Suite::Replace => replace_battery(cfg),
            Suite::Concat => concat_battery(cfg),
            Suite::All => unreachable!(),
        };
        results.extend(rows);
    }
    let failures = results.iter().filter(|r| !r.passed).count();
    Ok(SuiteReport {
        schema: SCHEMA_VERSION,
        suite: cfg.suite,
        seed: cfg.tol.seed,
        config: cfg.clone(),
        passed: failures == 0,
        failures,
        results,
    })
}

/// Seed for one battery instance, derived from the run seed.
fn sub_seed(seed: u64, tag: &str, n: usize, eps: f64) -> u64 {
    let mut h = seed ^ 0x51_7cc1_b727_220a_95;
    for b in tag.bytes().chain(n.to_le_bytes()).chain(eps.to_bits().to_le_bytes()) {
        h = (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Midpoint rule for `∫_0^s lambda` with `panels` panels.
pub fn riemann_lambda_integral(s: f64, panels: usize) -> f64 {
    let h = s / panels as f64;
    (0..panels)
        .map(|i| lambda((i as f64 + 0.5) * h).unwrap_or(f64::NAN))
        .sum::<f64>()
        * h
}

/// The quadrature auxiliary `F` evaluated with a plain Riemann sum.
pub fn riemann_smash_f(sigma: f64, tau: f64, t: f64, panels: usize) -> f64 {
    if tau * t <= sigma {
        return 0.0;
    }
    let s = (tau * t - sigma) / (tau - sigma);
    (tau - sigma) / tau * riemann_lambda_integral(s, panels)
        + (tau + sigma) / (2.0 * tau) * lambda(s).unwrap_or(f64::NAN)
}

fn kernels_battery(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let mut b = Battery::new("kernels");
    let q = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.tol.seed, "kernels", 0, 0.0));
    let ts: Vec<f64> = (0..1000).map(|_| rng.gen_range(-0.5..1.5)).collect();
    b.check("lambda_symmetry", json!({ "samples": ts.len() }), || {
        let mut worst: f64 = 0.0;
        for &t in &ts {
            worst = worst.max((lambda(1.0 - t)? - (1.0 - lambda(t)?)).abs());
        }
        Ok(Outcome::within(worst, 1e-12))
    });
    for (sigma, tau) in KERNEL_PAIRS {
        let pj = json!({ "sigma": sigma, "tau": tau });
        let Ok(p) = SmashParams::new(sigma, tau) else {
            b.check("smash_params", pj, || Err(params("invalid pair")));
            continue;
        };
        b.check("smash_symmetry", pj.clone(), || {
            let mut worst: f64 = 0.0;
            for &t in &ts {
                worst = worst.max((smash_t(p, 1.0 - t, &q)? - (1.0 - smash_t(p, t, &q)?)).abs());
            }
            Ok(Outcome::within(worst, 1e-9))
        });
        b.check("smash_identity_middle", pj.clone(), || {
            let mut worst: f64 = 0.0;
            for i in 0..=200 {
                let t = tau + (1.0 - 2.0 * tau) * i as f64 / 200.0;
                worst = worst.max((smash_t(p, t, &q)? - t).abs());
            }
            Ok(Outcome::within(worst, 1e-9))
        });
        b.check("smash_outer_bands_exact", pj.clone(), || {
            let mut worst: f64 = 0.0;
            for i in 0..=100 {
                let t = sigma * i as f64 / 100.0;
                worst = worst.max(smash_t(p, t, &q)?.abs());
                worst = worst.max((1.0 - smash_t(p, 1.0 - t, &q)?).abs());
            }
            Ok(Outcome::within(worst, 0.0))
        });
        b.check("smash_monotone", pj.clone(), || {
            let mut sorted = ts.clone();
            sorted.sort_by(f64::total_cmp);
            let mut worst: f64 = 0.0;
            let mut prev = 0.0;
            for &t in &sorted {
                let v = smash_t(p, t, &q)?;
                worst = worst.max(prev - v);
                prev = v;
            }
            Ok(Outcome::within(worst, 0.0))
        });
        b.check("smash_f_riemann_oracle", pj, || {
            let mut worst: f64 = 0.0;
            for t in [0.5, 0.9, 1.0 - 1e-12, 1.0] {
                let oracle = riemann_smash_f(sigma, tau, t, 1_000_000);
                worst = worst.max((smash_f(p, t, &q)? - oracle).abs());
            }
            worst = worst.max((riemann_smash_f(sigma, tau, 1.0, 1_000_000) - 1.0).abs());
            Ok(Outcome::within(worst, 1e-8))
        });
    }
    b.rows
}

/// Distance from `p` to a face of `I^n`.
fn face_distance(face: &Face, p: &[f64]) -> f64 {
    face.pins()
        .iter()
        .zip(p)
        .map(|(pin, &x)| match pin {
            Some(a) => (x - f64::from(*a)).abs(),
            None => (-x).max(x - 1.0).max(0.0),
        })
        .fold(0.0, f64::max)
}

/// Max-norm distance from `p` to a complex.
pub fn complex_distance(k: &CubicalComplex, p: &[f64]) -> f64 {
    k.maximal_faces()
        .iter()
        .map(|f| face_distance(f, p))
        .fold(f64::INFINITY, f64::min)
}

/// Max-norm distance from `p` to a union of boxes.
pub fn region_distance(r: &BoxRegion, p: &[f64]) -> f64 {
    r.boxes()
        .iter()
        .map(|bx| {
            bx.iter()
                .zip(p)
                .map(|(&(lo, hi), &x)| (lo - x).max(x - hi).max(0.0))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

fn retract_battery(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let mut b = Battery::new("retract");
    let res = cfg.tol.grid_res;
    for n in cfg.ns_for(Suite::Retract) {
        let j = CubicalComplex::j_complex(n).expect("n >= 1");
        let cube = Domain::Complex(CubicalComplex::full(n));
        let grid = cube.grid_points(res);
        for eps in cfg.eps_for(Suite::Retract) {
            let pj = json!({ "n": n, "eps": eps, "grid": res });
            let built = RetractionParams::from_eps(n, eps).and_then(|p| Ok((p, approx_retraction(&p)?)));
            let (p, r) = match built {
                Ok(x) => x,
                Err(e) => {
                    b.check("retraction_construct", pj, || Err(e));
                    continue;
                }
            };
            b.check("retraction_image_in_J", pj.clone(), || {
                let mut worst: f64 = 0.0;
                for x in &grid {
                    worst = worst.max(complex_distance(&j, &r.eval(x)?));
                }
                Ok(Outcome::within(worst, cfg.tol.eq_tol))
            });
            b.check("retraction_chamber_identity", pj.clone(), || {
                let chamber = Domain::Boxes(chamber_region(&j, eps)?);
                let pts = sample_points(&chamber, &cfg.tol);
                let mut worst: f64 = 0.0;
                for x in &pts {
                    worst = worst.max(max_gap(&r.eval(x)?, x));
                }
                Ok(Outcome::within(worst, 1e-12))
            });
            b.check("retraction_top_band", pj.clone(), || {
                let mut worst: f64 = 0.0;
                for x in &grid {
                    if x[n - 1] >= 1.0 - p.sigma {
                        worst = worst.max((r.eval(x)?[n - 1] - 1.0).abs());
                    }
                }
                Ok(Outcome::within(worst, 0.0))
            });
            b.check("retraction_rejects_swapped_order", pj.clone(), || {
                Ok(Outcome::flag(RetractionParams::new(n, eps, 0.5 * eps, 1.1 * eps).is_err()))
            });

            let Ok(d) = DeformationParams::new(n, eps) else {
                continue;
            };
            let note = d.tau_clamped.then_some("tau capped at 1/2");
            let h = match deformation_retraction_homotopy(n, eps) {
                Ok(h) => h,
                Err(e) => {
                    b.check("deformation_construct", pj, || Err(e));
                    continue;
                }
            };
            let with_note = |o: Outcome| match note {
                Some(s) => o.note(s),
                None => o,
            };
            b.check("deformation_starts_at_identity", pj.clone(), || {
                let mut worst: f64 = 0.0;
                for x in &grid {
                    worst = worst.max(max_gap(&h.eval(x, 0.0)?, x));
                }
                Ok(with_note(Outcome::within(worst, 1e-12)))
            });
            b.check("deformation_ends_in_J", pj.clone(), || {
                let mut worst: f64 = 0.0;
                for x in &grid {
                    worst = worst.max(complex_distance(&j, &h.eval(x, 1.0)?));
                }
                Ok(with_note(Outcome::within(worst, cfg.tol.eq_tol)))
            });
            let delta = eps.powi(n as i32 - 1);
            b.check("deformation_fixes_chamber", pj.clone(), || {
                if delta >= 0.5 {
                    return Ok(Outcome::within(0.0, 1e-12).note("empty chamber"));
                }
                let chamber = Domain::Boxes(chamber_region(&j, delta)?);
                let pts = sample_points(&chamber, &cfg.tol);
                let mut worst: f64 = 0.0;
                for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    for x in &pts {
                        worst = worst.max(max_gap(&h.eval(x, u)?, x));
                    }
                }
                Ok(with_note(Outcome::within(worst, 1e-12)))
            });
            if n >= 2 && delta < 0.5 {
                b.check("deformation_preserves_Jdelta", pj, || {
                    let region = j_delta_region(n, delta)?;
                    let pts = sample_points(&Domain::Boxes(region.clone()), &cfg.tol);
                    let mut worst: f64 = 0.0;
                    for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
                        for x in &pts {
                            worst = worst.max(region_distance(&region, &h.eval(x, u)?));
                        }
                    }
                    Ok(with_note(Outcome::within(worst, cfg.tol.eq_tol)))
                });
            }
        }
    }
    b.rows
}

/// DSL text of a seeded smooth map `I^n -> R^m`: a sum of scaled products of
/// coordinates and lambda-bumps.
pub fn random_map_text<R: Rng>(n: usize, m: usize, rng: &mut R) -> String {
    let mut comps = Vec::with_capacity(m);
    for _ in 0..m {
        let mut terms = vec![format!("(const {:.3})", rng.gen_range(-1.0..1.0))];
        for _ in 0..3 {
            let mut factors = vec![format!("(const {:.3})", rng.gen_range(-2.0..2.0))];
            for _ in 0..rng.gen_range(1..=2) {
                let k = rng.gen_range(1..=n);
                if rng.gen_bool(0.5) {
                    factors.push(format!("(coord {k})"));
                } else {
                    let row: Vec<String> = (0..n).map(|_| format!("{:.3}", rng.gen_range(-1.5..1.5))).collect();
                    factors.push(format!(
                        "(lambda (affine [[{}]] [{:.3}]))",
                        row.join(" "),
                        rng.gen_range(0.0..1.0)
                    ));
                }
            }
            terms.push(format!("(prod {})", factors.join(" ")));
        }
        comps.push(format!("(sum {})", terms.join(" ")));
    }
    let body = if m == 1 {
        comps.pop().unwrap()
    } else {
        format!("(tuple {})", comps.join(" "))
    };
    format!("(map {n} {body})")
}

/// `random ∘ T^n_{eps,tau}` as DSL text, `eps`-tame on all of `I^n`.
pub fn random_tame_map_text<R: Rng>(n: usize, m: usize, eps: f64, tau: f64, rng: &mut R) -> String {
    let inner = random_map_text(n, m, rng);
    let body = inner
        .strip_prefix(&format!("(map {n} "))
        .and_then(|s| s.strip_suffix(')'))
        .expect("generated header");
    let coords: Vec<String> = (1..=n).map(|k| format!("(coord {k})")).collect();
    format!(
        "(map {n} (cube (compose {body} (smash {eps} {tau} (tuple {})))))",
        coords.join(" ")
    )
}

/// A seeded `eps`-tame map.
pub fn random_tame_map<R: Rng>(n: usize, m: usize, eps: f64, rng: &mut R) -> Result<SmoothMap> {
    parse_map(&random_tame_map_text(n, m, eps, 0.5 * (eps + 0.5), rng))
}

fn identity_map(n: usize) -> Result<SmoothMap> {
    SmoothMap::identity(n)
}

fn tame_battery(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let mut b = Battery::new("tame");
    let tol = &cfg.tol;
    for n in cfg.ns_for(Suite::Tame) {
        let cube = Domain::Complex(CubicalComplex::full(n));
        for eps in cfg.eps_for(Suite::Tame) {
            let pj = json!({ "n": n, "eps": eps, "grid": tol.grid_res });
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(tol.seed, "tame", n, eps));
            b.check("identity_is_not_tame", pj.clone(), || {
                let r = check_tame(&identity_map(n)?, &cube, eps, tol)?;
                let w = r.witness.ok_or_else(|| Error::Precondition("no witness".into()))?;
                let depth = (w.point[w.axis] - f64::from(w.alpha)).abs();
                let gap = (r.worst_violation - depth).abs();
                Ok(Outcome {
                    passed: Some(!r.passed && gap <= 1e-12),
                    ..Outcome::within(gap, 1e-12)
                }
                .note(format!("violation {} at depth {depth}", r.worst_violation)))
            });
            let f = match random_tame_map(n, 2, eps, &mut rng) {
                Ok(f) => f,
                Err(e) => {
                    b.check("random_map", pj, || Err(e));
                    continue;
                }
            };
            b.check("tame_map_passes", pj.clone(), || {
                let r = check_tame(&f, &cube, eps, tol)?;
                Ok(Outcome::within(r.worst_violation, tol.eq_tol))
            });
            b.check("tame_at_smaller_eps", pj.clone(), || {
                let r = check_tame(&f, &cube, 0.5 * eps, tol)?;
                Ok(Outcome::within(r.worst_violation, tol.eq_tol))
            });
            b.check("tame_implies_admissible", pj.clone(), || {
                let r = check_admissible(&f, &cube, eps, tol)?;
                Ok(Outcome::within(r.worst_violation, tol.eq_tol))
            });
            b.check("uniqueness_from_chamber", pj.clone(), || {
                // f and f ∘ T^n_{eps/2, eps} are both eps-tame and agree on the chamber
                let g = SmoothMap::compose(f.clone(), SmoothMap::smash(SmashParams::new(0.5 * eps, eps)?, n))?;
                let chamber = Domain::Boxes(chamber_region(&CubicalComplex::full(n), eps)?);
                let on_chamber = max_discrepancy(&f, &g, &sample_points(&chamber, tol))?;
                let everywhere = max_discrepancy(&f, &g, &sample_points(&cube, tol))?;
                Ok(Outcome::within(on_chamber.max(everywhere), tol.eq_tol))
            });
            b.check("fiber_constant", pj.clone(), || {
                let tau = 0.5 * (eps + 0.5);
                let good = check_fiber_constant(&f, eps, tau, tol)?;
                let bad = check_fiber_constant(&identity_map(n)?, eps, tau, tol)?;
                Ok(Outcome {
                    passed: Some(good.passed && !bad.passed),
                    ..Outcome::within(good.worst_violation, tol.eq_tol)
                })
            });

            let k = if n == 1 {
                CubicalComplex::full(1)
            } else {
                CubicalComplex::boundary(n).expect("n >= 2")
            };
            let kd = Domain::Complex(k.clone());
            let raw = parse_map(&random_map_text(n, 1, &mut rng));
            b.check("tame_replace", pj.clone(), || {
                let raw = raw.clone()?;
                let sigma = 0.5 * eps;
                let (g, h) = tame_replace(&raw, &k, sigma, eps)?;
                let pts = sample_points(&kd, tol);
                let mut worst = check_tame(&g, &kd, sigma, tol)?.worst_violation;
                worst = worst.max(max_discrepancy(&h.slice(0.0)?, &raw, &pts)?);
                worst = worst.max(max_discrepancy(&h.slice(1.0)?, &g, &pts)?);
                let chamber = sample_points(&Domain::Boxes(chamber_region(&k, eps)?), tol);
                for u in [0.0, 0.5, 1.0] {
                    worst = worst.max(max_discrepancy(&h.slice(u)?, &raw, &chamber)?);
                }
                Ok(Outcome::within(worst, tol.eq_tol))
            });

            let j = Domain::Complex(CubicalComplex::j_complex(n).expect("n >= 1"));
            b.check("extend_tame", pj.clone(), || {
                let p = ExtensionParams::from_tameness(eps, eps / 3.0)?;
                let g = extend_tame(&f, &p, tol)?;
                let mut worst = max_discrepancy(&g, &f, &sample_points(&j, tol))?;
                worst = worst.max(check_tame(&g, &cube, p.sigma, tol)?.worst_violation);
                let bottom = Domain::Complex(CubicalComplex::single(Face::new(n, &[(n - 1, 0)])?));
                worst = worst.max(check_tame(&g, &bottom, p.sigma_prime, tol)?.worst_violation);
                Ok(Outcome::within(worst, tol.eq_tol))
            });
            if n >= 2 {
                b.check("extend_to_jdelta", pj, || {
                    let (fe, region) = extend_to_jdelta(&f, eps, tol)?;
                    let mut worst = max_discrepancy(&fe, &f, &sample_points(&j, tol))?;
                    worst = worst.max(check_admissible(&fe, &Domain::Boxes(region), eps, tol)?.worst_violation);
                    let note = (n == 2).then_some("tau capped at 1/2");
                    let o = Outcome::within(worst, tol.eq_tol);
                    Ok(match note {
                        Some(s) => o.note(s),
                        None => o,
                    })
                });
            }
        }
    }
    b.rows
}

/// A seeded map on `I^n` that is `eps`-tame on the face `t_1 = 0` but not
/// elsewhere: a tame part plus `t_1` times a generic part.
pub fn random_map_tame_on_first_face<R: Rng>(n: usize, eps: f64, rng: &mut R) -> Result<SmoothMap> {
    let tame = random_tame_map(n, 1, eps, rng)?;
    let wild = parse_map(&random_map_text(n, 1, rng))?;
    SmoothMap::sum(vec![
        tame,
        SmoothMap::product(vec![SmoothMap::coord(n, 0)?, wild])?,
    ])
}

/// `L` for the replacement battery: the facet `t_1 = 0` of `∂I^n`, or the
/// whole interval when `n = 1`.
pub fn replacement_pair(n: usize) -> Result<(CubicalComplex, CubicalComplex)> {
    if n == 1 {
        let k = CubicalComplex::full(1);
        return Ok((k, CubicalComplex::single("0".parse()?)));
    }
    let k = CubicalComplex::boundary(n)?;
    let l = CubicalComplex::single(Face::new(n, &[(0, 0)])?);
    Ok((k, l))
}

fn replace_battery(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let mut b = Battery::new("replace");
    let tol = &cfg.tol;
    let fine = tol.with_grid(2 * tol.grid_res - 1);
    for n in cfg.ns_for(Suite::Replace) {
        for eps in cfg.eps_for(Suite::Replace) {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(tol.seed, "replace", n, eps));
            for sample in 0..2 {
                let pj = json!({ "n": n, "eps": eps, "sample": sample, "grid": tol.grid_res });
                let run = (|| {
                    let (k, l) = replacement_pair(n)?;
                    let f = random_map_tame_on_first_face(n, eps, &mut rng)?;
                    let (g, h, trace) = admissible_replace(&f, &k, &l, eps, tol)?;
                    Ok::<_, Error>((k, l, f, g, h, trace))
                })();
                let (k, l, f, g, h, trace) = match run {
                    Ok(x) => x,
                    Err(e) => {
                        b.check("replace_construct", pj, || Err(e));
                        continue;
                    }
                };
                let kd = Domain::Complex(k.clone());
                b.check("replace_admissible", pj.clone(), || {
                    Ok(Outcome::within(trace.final_report.worst_violation, tol.eq_tol))
                });
                b.check("replace_admissible_fine_grid", pj.clone(), || {
                    let r = check_admissible(&g, &kd, eps, &fine)?;
                    Ok(Outcome::within(r.worst_violation, tol.eq_tol).note(format!("grid {}", fine.grid_res)))
                });
                b.check("replace_relative_to_L", pj.clone(), || {
                    let pts = sample_points(&Domain::Complex(l.clone()), tol);
                    let mut worst: f64 = 0.0;
                    for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
                        worst = worst.max(max_discrepancy(&h.slice(u)?, &f, &pts)?);
                    }
                    Ok(Outcome::within(worst, tol.eq_tol))
                });
                b.check("replace_endpoints", pj.clone(), || {
                    let pts = sample_points(&kd, tol);
                    let start = max_discrepancy(&h.slice(0.0)?, &f, &pts)?;
                    let end = max_discrepancy(&h.slice(1.0)?, &g, &pts)?;
                    Ok(Outcome::within(start.max(end), tol.eq_tol))
                });
                b.check("replace_trace_covers_faces", pj, || {
                    let mut expected: Vec<String> = k
                        .all_faces()
                        .into_iter()
                        .filter(|x| x.dim() >= 1 && !l.contains_face(x))
                        .map(|x| x.to_string())
                        .collect();
                    let mut seen: Vec<String> = trace.processed_faces().into_iter().map(String::from).collect();
                    let dims: Vec<usize> = trace.skeleta.iter().map(|s| s.dim).collect();
                    let increasing = dims.windows(2).all(|w| w[0] < w[1]);
                    expected.sort();
                    seen.sort();
                    Ok(Outcome::flag(increasing && expected == seen))
                });
            }
        }
    }
    b.rows
}

/// A map on `I^n` that vanishes on `∂I^n`: a product of lambda-bumps.
pub fn boundary_bump(n: usize, height: f64, margin: f64) -> Result<SmoothMap> {
    let mut fs = vec![SmoothMap::constant(n, vec![height])?];
    let slope = 1.0 / margin;
    for k in 0..n {
        let x = SmoothMap::coord(n, k)?;
        fs.push(x.scale_shift(slope, 0.0)?.then(SmoothMap::lambda(1))?);
        fs.push(x.scale_shift(-slope, slope)?.then(SmoothMap::lambda(1))?);
    }
    Ok(SmoothMap::product(fs)?.on_cube())
}

/// Two homotopies with `F(., 1) = G(., 0)`: tame `f`, then tame the result
/// again with smaller parameters.
pub fn compatible_homotopies<R: Rng>(n: usize, eps: f64, rng: &mut R) -> Result<(Homotopy, Homotopy)> {
    let f = parse_map(&random_map_text(n, 2, rng))?;
    let k = CubicalComplex::full(n);
    let (g, first) = tame_replace(&f, &k, 0.5 * eps, eps)?;
    let (_, second) = tame_replace(&g, &k, 0.25 * eps, 0.5 * eps)?;
    Ok((first, second))
}

fn concat_battery(cfg: &SuiteConfig) -> Vec<PropertyResult> {
    let mut b = Battery::new("concat");
    let tol = &cfg.tol;
    for n in cfg.ns_for(Suite::Concat) {
        for eps in cfg.eps_for(Suite::Concat) {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(tol.seed, "concat", n, eps));
            for pair in 0..3 {
                let pj = json!({ "n": n, "eps": eps, "pair": pair });
                let built = compatible_homotopies(n, eps, &mut rng)
                    .and_then(|(f, g)| Ok((f.clone(), g.clone(), concat_homotopy(&f, &g, tol)?)));
                let (first, second, c) = match built {
                    Ok(x) => x,
                    Err(e) => {
                        b.check("concat_construct", pj, || Err(e));
                        continue;
                    }
                };
                b.check("concat_seam_values", pj.clone(), || {
                    Ok(Outcome::within(homotopy_seam(&c, tol)?.value_gap, tol.eq_tol))
                });
                b.check("concat_seam_slopes", pj.clone(), || {
                    Ok(Outcome::within(homotopy_seam(&c, tol)?.slope_gap, tol.deriv_tol))
                });
                b.check("concat_endpoints", pj, || {
                    let pts = sample_points(first.base(), tol);
                    let a = max_discrepancy(&c.slice(0.0)?, &first.slice(0.0)?, &pts)?;
                    let z = max_discrepancy(&c.slice(1.0)?, &second.slice(1.0)?, &pts)?;
                    Ok(Outcome::within(a.max(z), tol.eq_tol))
                });
            }
            if n >= 1 {
                let pj = json!({ "n": n, "margin": eps });
                b.check("concat_maps_boundary_constant", pj.clone(), || {
                    let phi = boundary_bump(n, 1.0, eps)?;
                    let psi = boundary_bump(n, -0.5, eps)?;
                    let m = concat_maps(&phi, &psi, tol)?;
                    let bd = if n == 1 {
                        vec![vec![0.0], vec![1.0]]
                    } else {
                        sample_points(&Domain::Complex(CubicalComplex::boundary(n)?), tol)
                    };
                    let mut worst: f64 = 0.0;
                    for p in &bd {
                        worst = worst.max(m.eval(p)?[0].abs());
                    }
                    let seam = seam_check(&m, &sample_points(&Domain::Complex(CubicalComplex::full(n)), tol), DEFAULT_FD_STEP)?;
                    Ok(Outcome {
                        passed: Some(worst <= tol.eq_tol && seam.passed(tol.eq_tol, tol.deriv_tol)),
                        ..Outcome::within(worst.max(seam.value_gap), tol.eq_tol)
                    })
                });
            }
        }
    }
    b.rows
}

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e17)`.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    }
}

/// CSV of `f` over the `grid_res^n` grid of `I^n`, last axis fastest.
pub fn sample_map_csv(f: &SmoothMap, grid_res: usize) -> Result<String> {
    if grid_res < 2 {
        return Err(params(format!("grid must have at least 2 points, got {grid_res}")));
    }
    let n = f.in_dim();
    let mut out = String::new();
    let header: Vec<String> = (1..=n)
        .map(|k| format!("t{k}"))
        .chain((1..=f.out_dim()).map(|k| format!("y{k}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let pts = Domain::Complex(CubicalComplex::full(n)).grid_points(grid_res);
    for p in pts {
        let y = f.eval(&p)?;
        let cells: Vec<String> = p.iter().chain(&y).map(|&v| format_g17(v)).collect();
        writeln!(out, "{}", cells.join(",")).expect("writing to a String");
    }
    Ok(out)
}

/// Parses `map_text` and samples it; see [`sample_map_csv`].
pub fn sample_map(map_text: &str, grid_res: usize) -> Result<String> {
    sample_map_csv(&parse_map(map_text)?, grid_res)
}
