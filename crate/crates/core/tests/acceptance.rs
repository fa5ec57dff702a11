//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tamecube::cubelat::{chamber_region, CubicalComplex, Domain, Face};
use tamecube::fnexpr::{fd_partial, parse_map, seam_check, SmoothMap, DEFAULT_FD_STEP};
use tamecube::kernels::{lambda, smash_f, smash_t, QuadratureConfig, SmashParams};
use tamecube::replace::admissible_replace;
use tamecube::retract::{approx_retraction, deformation_retraction_homotopy, RetractionParams};
use tamecube::suite::{compatible_homotopies, random_map_tame_on_first_face, random_tame_map_text};
use tamecube::tame::{
    check_admissible, check_tame, concat_homotopy, extend_tame, max_discrepancy, sample_points,
    ExtensionParams, ToleranceConfig,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `exp(-1/t) / (exp(-1/t) + exp(-1/(1-t)))`, straight from the definition.
fn oracle_lambda(t: f64) -> f64 {
    let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (g(t), g(1.0 - t));
    a / (a + b)
}

/// Midpoint Riemann sum of the quadrature auxiliary, independent of the
/// library's quadrature.
fn oracle_f(sigma: f64, tau: f64, t: f64, panels: usize) -> f64 {
    if tau * t <= sigma {
        return 0.0;
    }
    let s = (tau * t - sigma) / (tau - sigma);
    let h = s / panels as f64;
    let integral: f64 = (0..panels).map(|i| oracle_lambda((i as f64 + 0.5) * h)).sum::<f64>() * h;
    (tau - sigma) / tau * integral + (tau + sigma) / (2.0 * tau) * oracle_lambda(s)
}

/// Max-norm distance from `p` to `J^{n-1} = ∂I^{n-1} × I ∪ I^{n-1} × {1}`.
fn dist_to_j(p: &[f64]) -> f64 {
    let n = p.len();
    let mut d = (1.0 - p[n - 1]).abs();
    for &x in &p[..n - 1] {
        d = d.min(x.abs()).min((1.0 - x).abs());
    }
    d
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

const PAIRS: [(f64, f64); 5] = [(0.0, 0.3), (0.05, 0.5), (0.1, 0.25), (0.1, 0.3), (0.2, 0.4)];

fn kernel_identities() -> Check {
    let q = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ts: Vec<f64> = (0..1000).map(|_| rng.gen_range(-0.5..1.5)).collect();
    let (mut lam, mut sym, mut mid, mut band) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &t in &ts {
        lam = lam.max((lambda(1.0 - t).map_err(err)? - (1.0 - lambda(t).map_err(err)?)).abs());
    }
    for (sigma, tau) in PAIRS {
        let p = SmashParams::new(sigma, tau).map_err(err)?;
        let tt = |t: f64| smash_t(p, t, &q).map_err(err);
        for &t in &ts {
            sym = sym.max((tt(1.0 - t)? - (1.0 - tt(t)?)).abs());
            if (tau..=1.0 - tau).contains(&t) {
                mid = mid.max((tt(t)? - t).abs());
            }
            if t <= sigma {
                band = band.max(tt(t)?.abs());
            }
            if t >= 1.0 - sigma {
                band = band.max((tt(t)? - 1.0).abs());
            }
        }
        for i in 0..=100 {
            let t = tau + (1.0 - 2.0 * tau) * f64::from(i) / 100.0;
            mid = mid.max((tt(t)? - t).abs());
        }
    }
    ensure(
        lam <= 1e-12 && sym <= 1e-9 && mid <= 1e-9 && band == 0.0,
        format!("lambda sym {lam:.1e}, T sym {sym:.1e}, T=t {mid:.1e}, bands {band:e}"),
    )
}

fn quadrature_oracle() -> Check {
    let q = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for (sigma, tau) in [(0.1, 0.25), (0.05, 0.5), (0.0, 0.3)] {
        let p = SmashParams::new(sigma, tau).map_err(err)?;
        let at_one = oracle_f(sigma, tau, 1.0, 1_000_000);
        worst = worst.max((at_one - 1.0).abs());
        worst = worst.max((smash_f(p, 1.0, &q).map_err(err)? - at_one).abs());
        // just below 1 the library integrates instead of short-circuiting
        let t = 1.0 - 1e-12;
        worst = worst.max((smash_f(p, t, &q).map_err(err)? - oracle_f(sigma, tau, t, 1_000_000)).abs());
    }
    ensure(worst <= 1e-8, format!("max |F(1) - oracle| {worst:.2e}"))
}

fn retraction_containment() -> Check {
    let (mut image, mut fixed) = (0.0f64, 0.0f64);
    for n in 1..=3 {
        let grid = Domain::Complex(CubicalComplex::full(n)).grid_points(21);
        let j = CubicalComplex::j_complex(n).map_err(err)?;
        for eps in [0.1, 0.25, 0.4] {
            let r = approx_retraction(&RetractionParams::from_eps(n, eps).map_err(err)?).map_err(err)?;
            for x in &grid {
                image = image.max(dist_to_j(&r.eval(x).map_err(err)?));
            }
            let chamber = Domain::Boxes(chamber_region(&j, eps).map_err(err)?);
            for x in chamber.grid_points(21) {
                fixed = fixed.max(max_gap(&r.eval(&x).map_err(err)?, &x));
            }
        }
    }
    ensure(
        image <= 1e-9 && fixed <= 1e-12,
        format!("dist to J {image:.1e}, chamber drift {fixed:.1e}"),
    )
}

fn tame_extension() -> Check {
    let cfg = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for i in 0..20 {
        let n = 1 + i % 3;
        let eps = [0.2, 0.3, 0.4][(i / 3) % 3];
        let tau = 0.5 * (eps + 0.5);
        let f = parse_map(&random_tame_map_text(n, 1 + i % 2, eps, tau, &mut rng)).map_err(err)?;
        let p = ExtensionParams::from_tameness(eps, eps / 3.0).map_err(err)?;
        let g = extend_tame(&f, &p, &cfg).map_err(err)?;
        let j = Domain::Complex(CubicalComplex::j_complex(n).map_err(err)?);
        let cube = Domain::Complex(CubicalComplex::full(n));
        let bottom = Domain::Complex(CubicalComplex::single(Face::new(n, &[(n - 1, 0)]).map_err(err)?));
        let restrict = max_discrepancy(&g, &f, &sample_points(&j, &cfg)).map_err(err)?;
        let tame = check_tame(&g, &cube, p.sigma, &cfg).map_err(err)?;
        let floor = check_tame(&g, &bottom, p.sigma_prime, &cfg).map_err(err)?;
        worst = worst.max(restrict);
        if restrict > 1e-9 || !tame.passed || !floor.passed {
            failures.push(format!("map {i} (n={n}, eps={eps})"));
        }
    }
    ensure(
        failures.is_empty(),
        format!("20 maps, |g - f| on J {worst:.1e}, failures {failures:?}"),
    )
}

fn admissible_replacement() -> Check {
    let cfg = ToleranceConfig::default();
    let fine = cfg.with_grid(65);
    let eps = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let subcomplexes = [
        (2, vec!["0*"]),
        (2, vec!["00"]),
        (2, vec![]),
        (2, vec!["0*"]),
        (2, vec!["01"]),
        (3, vec!["0**"]),
        (3, vec!["0*0"]),
        (3, vec!["00*", "0*1"]),
        (3, vec![]),
        (3, vec!["0**"]),
    ];
    let (mut rel, mut ends) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for (i, (n, pats)) in subcomplexes.iter().enumerate() {
        let n = *n;
        let k = CubicalComplex::boundary(n).map_err(err)?;
        let faces: Vec<Face> = pats.iter().map(|p| p.parse().unwrap()).collect();
        let l = CubicalComplex::from_faces(n, faces).map_err(err)?;
        let f = random_map_tame_on_first_face(n, eps, &mut rng).map_err(err)?;
        let (g, h, trace) = admissible_replace(&f, &k, &l, eps, &cfg).map_err(|e| format!("map {i}: {e}"))?;
        let kd = Domain::Complex(k.clone());
        let coarse_ok = check_admissible(&g, &kd, eps, &cfg).map_err(err)?.passed && trace.final_report.passed;
        let fine_ok = check_admissible(&g, &kd, eps, &fine).map_err(err)?.passed;
        let on_l = sample_points(&Domain::Complex(l.clone()), &cfg);
        for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let slice = h.slice(u).map_err(err)?;
            if !on_l.is_empty() {
                rel = rel.max(max_discrepancy(&slice, &f, &on_l).map_err(err)?);
            }
        }
        let on_k = sample_points(&kd, &cfg);
        ends = ends.max(max_discrepancy(&h.slice(0.0).map_err(err)?, &f, &on_k).map_err(err)?);
        ends = ends.max(max_discrepancy(&h.slice(1.0).map_err(err)?, &g, &on_k).map_err(err)?);
        if !coarse_ok || !fine_ok {
            failures.push(i);
        }
    }
    ensure(
        failures.is_empty() && rel <= 1e-9 && ends <= 1e-9,
        format!("10 maps, relativity {rel:.1e}, endpoints {ends:.1e}, inadmissible {failures:?}"),
    )
}

fn deformation_homotopy() -> Check {
    let eps = 0.3;
    let (mut start, mut end, mut fixed) = (0.0f64, 0.0f64, 0.0f64);
    for n in [2, 3] {
        let h = deformation_retraction_homotopy(n, eps).map_err(err)?;
        for x in Domain::Complex(CubicalComplex::full(n)).grid_points(21) {
            start = start.max(max_gap(&h.eval(&x, 0.0).map_err(err)?, &x));
            end = end.max(dist_to_j(&h.eval(&x, 1.0).map_err(err)?));
        }
        let j = CubicalComplex::j_complex(n).map_err(err)?;
        let chamber = Domain::Boxes(chamber_region(&j, eps.powi(n as i32 - 1)).map_err(err)?);
        for x in chamber.grid_points(21) {
            for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
                fixed = fixed.max(max_gap(&h.eval(&x, u).map_err(err)?, &x));
            }
        }
    }
    ensure(
        start <= 1e-12 && end <= 1e-9 && fixed <= 1e-12,
        format!("h0 drift {start:.1e}, h1 dist to J {end:.1e}, chamber drift {fixed:.1e}"),
    )
}

fn concatenation_seams() -> Check {
    let cfg = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut value, mut slope) = (0.0f64, 0.0f64);
    for i in 0..10 {
        let n = 1 + i % 2;
        let (first, second) = compatible_homotopies(n, 0.25, &mut rng).map_err(err)?;
        let c = concat_homotopy(&first, &second, &cfg).map_err(err)?;
        let mut pts = sample_points(first.base(), &cfg);
        for p in &mut pts {
            p.push(0.5);
        }
        let seam = seam_check(c.map(), &pts, DEFAULT_FD_STEP).map_err(err)?;
        value = value.max(seam.value_gap);
        slope = slope.max(seam.slope_gap);
        // central difference straddling the seam against each side's slope
        let (_, _, pieces) = c.map().as_piecewise().expect("piecewise in time");
        for p in pts.iter().step_by(7) {
            let across = fd_partial(c.map(), p, n, DEFAULT_FD_STEP).map_err(err)?;
            for piece in pieces {
                slope = slope.max(max_gap(&across, &fd_partial(piece, p, n, DEFAULT_FD_STEP).map_err(err)?));
            }
        }
    }
    ensure(
        value <= 1e-9 && slope <= 1e-6,
        format!("10 pairs, value gap {value:.1e}, slope gap {slope:.1e}"),
    )
}

fn negative_controls() -> Check {
    let cfg = ToleranceConfig::default();
    let mut notes = Vec::new();
    for n in [1, 2] {
        let id = SmoothMap::identity(n).map_err(err)?;
        let cube = Domain::Complex(CubicalComplex::full(n));
        for eps in [0.05, 0.1, 0.25] {
            let r = check_tame(&id, &cube, eps, &cfg).map_err(err)?;
            let w = r.witness.ok_or(format!("no witness at eps={eps}"))?;
            let depth = (w.point[w.axis] - f64::from(w.alpha)).abs();
            if r.passed || (r.worst_violation - depth).abs() > 1e-12 || depth > eps {
                return Err(format!("n={n} eps={eps}: violation {} depth {depth}", r.worst_violation));
            }
            notes.push(format!("{:.4}", r.worst_violation));
        }
    }
    let broken = RetractionParams::new(2, 0.3, 0.1, 0.35);
    ensure(
        broken.is_err(),
        format!("identity violations {} equal collar depths; eps' > eps rejected", notes.join("/")),
    )
}

fn strip_timestamp(json: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).expect("report is JSON");
    v.as_object_mut().expect("object").remove("timestamp");
    v.to_string()
}

fn cli_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut reports = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_tamecube"))
            .args(["verify", "--suite", "all", "--seed", "7", "--out"])
            .arg(&out)
            .output()
            .map_err(err)?;
        if status.status.code() != Some(0) {
            return Err(format!(
                "run {run} exited with {:?}: {}",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr)
            ));
        }
        reports.push(std::fs::read_to_string(&out).map_err(err)?);
    }
    let (a, b) = (strip_timestamp(&reports[0]), strip_timestamp(&reports[1]));
    ensure(
        a == b,
        format!("two runs, {} bytes, identical modulo timestamp: {}", reports[0].len(), a == b),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Check, Duration); 9] = [
        ("kernel identities", kernel_identities, Duration::from_secs(5)),
        ("quadrature oracle", quadrature_oracle, Duration::from_secs(10)),
        ("retraction containment and identity", retraction_containment, Duration::from_secs(20)),
        ("tame extension", tame_extension, Duration::from_secs(60)),
        ("admissible replacement", admissible_replacement, Duration::from_secs(120)),
        ("deformation homotopy", deformation_homotopy, Duration::from_secs(30)),
        ("concatenation smoothness", concatenation_seams, Duration::from_secs(10)),
        ("negative controls", negative_controls, Duration::from_secs(5)),
        ("CLI determinism", cli_determinism, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit {limit:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name} ({:.2}s) {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
