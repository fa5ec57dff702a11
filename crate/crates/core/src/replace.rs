//! Admissible replacement: homotope a map on a complex `K`, relative to a
//! subcomplex `L`, to an `eps`-admissible one, one skeleton at a time.

use serde::Serialize;

use crate::cubelat::{CubicalComplex, Domain, Face};
use crate::error::{domain, params, Error, Result};
use crate::fnexpr::{Homotopy, SmoothMap};
use crate::tame::{
    check_admissible, check_tame, concat_homotopy, extend_tame, tame_replace, ExtensionParams,
    TamenessReport, ToleranceConfig,
};

/// How many times an extension step may halve its `sigma` before giving up.
pub const MAX_SIGMA_HALVINGS: u32 = 8;

/// Affine identification of `F × I` with `I^{j+1}`, `j = dim F`.
///
/// The chart sends `(s_1, .., s_j, w)` to the point of `F` whose free
/// coordinates are `s` and to time `u = 1 - w`, so `(∂F × I) ∪ (F × {0})`
/// lands on `J^j` and `F × {1}` on the bottom face `w = 0`.
#[derive(Debug, Clone)]
pub struct FaceChart {
    pub face: Face,
    /// `I^{j+1} -> I^{n+1}`.
    pub forward: SmoothMap,
    /// `I^{n+1} -> I^{j+1}`.
    pub inverse: SmoothMap,
}

pub fn face_chart(face: &Face) -> Result<FaceChart> {
    let n = face.ambient_dim();
    let j = face.dim();
    if j == 0 {
        return Err(domain(format!("vertex {face} needs no chart")));
    }
    let free = face.free_axes();
    let mut fwd = vec![vec![0.0; j + 1]; n + 1];
    let mut fwd_off = vec![0.0; n + 1];
    let mut inv = vec![vec![0.0; n + 1]; j + 1];
    let mut inv_off = vec![0.0; j + 1];
    for (i, &a) in free.iter().enumerate() {
        fwd[a][i] = 1.0;
        inv[i][a] = 1.0;
    }
    for (axis, pin) in face.pins().iter().enumerate() {
        if let Some(alpha) = pin {
            fwd_off[axis] = f64::from(*alpha);
        }
    }
    fwd[n][j] = -1.0;
    fwd_off[n] = 1.0;
    inv[j][n] = -1.0;
    inv_off[j] = 1.0;
    Ok(FaceChart {
        face: face.clone(),
        forward: SmoothMap::affine(fwd, fwd_off)?,
        inverse: SmoothMap::affine(inv, inv_off)?,
    })
}

/// `F × I` as a face of `I^{n+1}`.
fn cylinder(face: &Face) -> Result<Face> {
    let pins: Vec<(usize, u8)> = face
        .pins()
        .iter()
        .enumerate()
        .filter_map(|(a, p)| p.map(|alpha| (a, alpha)))
        .collect();
    Face::new(face.ambient_dim() + 1, &pins)
}

/// One extension over `F × I`.
#[derive(Debug, Clone, Serialize)]
pub struct FaceStep {
    pub face: String,
    pub params: ExtensionParams,
    pub halvings: u32,
    /// `sigma`-tameness of the extension on `I^{j+1}`.
    pub extension: TamenessReport,
    /// `eps^j`-tameness of the new end map on `F`.
    pub end_on_face: TamenessReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkeletonStep {
    pub dim: usize,
    pub faces: Vec<FaceStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplacementTrace {
    pub eps: f64,
    /// Parameters `(sigma, eps)` of the initial taming.
    pub taming: (f64, f64),
    pub skeleta: Vec<SkeletonStep>,
    pub final_report: TamenessReport,
}

impl ReplacementTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    /// Faces extended over, in processing order.
    pub fn processed_faces(&self) -> Vec<&str> {
        self.skeleta
            .iter()
            .flat_map(|s| s.faces.iter().map(|f| f.face.as_str()))
            .collect()
    }
}

fn lift_to_cylinder(f: &SmoothMap) -> Result<SmoothMap> {
    let n = f.in_dim();
    let space = (0..n)
        .map(|k| SmoothMap::coord(n + 1, k))
        .collect::<Result<Vec<_>>>()?;
    SmoothMap::tuple(space)?.then(f.clone())
}

struct Extended {
    map: SmoothMap,
    step: FaceStep,
    sigma: f64,
}

/// Extends the homotopy already built on `∂F × I` and `F × {0}` over `F × I`.
fn extend_over_face(
    face: &Face,
    on_boundary: SmoothMap,
    sigma_prime: f64,
    eps_prime: f64,
    eps_ext: f64,
    sigma0: f64,
    end_eps: f64,
    cfg: &ToleranceConfig,
) -> Result<Extended> {
    let chart = face_chart(face)?;
    let f_j = chart.forward.then(on_boundary)?;
    let j = face.dim();
    let cube = Domain::Complex(CubicalComplex::full(j + 1));
    let mut sigma = sigma0;
    for halvings in 0..=MAX_SIGMA_HALVINGS {
        let p = ExtensionParams::new(eps_ext, sigma, eps_prime, sigma_prime)?;
        let g_j = extend_tame(&f_j, &p, cfg)?;
        let extension = check_tame(&g_j, &cube, sigma, cfg)?;
        let bottom = Domain::Complex(CubicalComplex::single(Face::new(j + 1, &[(j, 0)])?));
        let bottom_ok = check_tame(&g_j, &bottom, sigma_prime, cfg)?.passed;
        if extension.passed && bottom_ok {
            let map = chart.inverse.then(g_j)?;
            let on_face = Domain::Complex(CubicalComplex::single(face.clone()));
            let end_on_face = check_tame(&Homotopy::new(map.clone(), on_face.clone())?.slice(1.0)?, &on_face, end_eps, cfg)?;
            return Ok(Extended {
                map,
                sigma,
                step: FaceStep {
                    face: face.to_string(),
                    params: p,
                    halvings,
                    extension,
                    end_on_face,
                },
            });
        }
        sigma *= 0.5;
    }
    Err(Error::Precondition(format!(
        "extension over {face} is not tame after {MAX_SIGMA_HALVINGS} halvings of sigma"
    )))
}

/// Homotopy `f ≃ g` relative to `L` with `g` `eps`-admissible on `K`.
///
/// First `f' = f ∘ T^n_{sigma0, eps0}`, `eps0 = eps^{max(dim L, 1)}`, then for
/// every face `F` of `K` outside `L`, by increasing dimension `j`, the
/// homotopy on `(∂F × I) ∪ (F × {0})` is extended over `F × I` with
/// `sigma' = eps^j`. The returned homotopy is the taming homotopy followed by
/// the skeleton homotopy.
pub fn admissible_replace(
    f: &SmoothMap,
    k: &CubicalComplex,
    l: &CubicalComplex,
    eps: f64,
    cfg: &ToleranceConfig,
) -> Result<(SmoothMap, Homotopy, ReplacementTrace)> {
    cfg.validate()?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(params(format!("replacement needs 0 < eps < 1/2, got {eps}")));
    }
    let n = k.ambient_dim();
    if f.in_dim() != n || l.ambient_dim() != n {
        return Err(Error::Dimension {
            node: "admissible_replace".into(),
            message: format!(
                "map takes {} inputs; K lives in I^{n}, L in I^{}",
                f.in_dim(),
                l.ambient_dim()
            ),
        });
    }
    if !l.is_subcomplex_of(k) {
        return Err(Error::Precondition(format!("L = {l} is not a subcomplex of K = {k}")));
    }
    let kd = Domain::Complex(k.clone());
    if !l.is_empty() {
        let r = check_admissible(f, &Domain::Complex(l.clone()), eps, cfg)?;
        if !r.passed {
            return Err(Error::Precondition(format!(
                "input is not {eps}-admissible on L (violation {:e} at {:?})",
                r.worst_violation, r.witness
            )));
        }
    }
    let Some(dim_k) = k.dim() else {
        return Err(domain("K is empty"));
    };
    if dim_k == 0 {
        let h = Homotopy::constant(f, kd.clone())?;
        let final_report = check_admissible(f, &kd, eps, cfg)?;
        let trace = ReplacementTrace {
            eps,
            taming: (0.0, 0.0),
            skeleta: Vec::new(),
            final_report,
        };
        return Ok((f.clone(), h, trace));
    }

    let eps0 = eps.powi(l.dim().unwrap_or(0).max(1) as i32);
    let sigma0 = 0.5 * eps0;
    let (f_tame, taming) = tame_replace(f, k, sigma0, eps0)?;
    let still = lift_to_cylinder(&f_tame)?;

    // homotopy pieces on F × I for faces outside L, keyed by face
    let mut pieces: std::collections::BTreeMap<Face, SmoothMap> = Default::default();
    let piece_for = |pieces: &std::collections::BTreeMap<Face, SmoothMap>, g: &Face| {
        pieces.get(g).cloned().unwrap_or_else(|| still.clone())
    };
    let mut skeleta = Vec::new();
    // tameness of the homotopies built so far on their cylinders
    let mut prev_sigma = sigma0;
    for j in 1..=dim_k {
        let faces: Vec<Face> = k
            .faces_of_dim(j)
            .into_iter()
            .filter(|g| !l.contains_face(g))
            .collect();
        if faces.is_empty() {
            continue;
        }
        let sigma_prime = eps.powi(j as i32);
        let eps_prime = eps.powi(j as i32 - 1).min(0.5);
        let eps_ext = sigma0.min(prev_sigma);
        let sigma = 0.5 * eps.powi(j as i32 + 1).min(eps_ext);
        let mut steps = Vec::with_capacity(faces.len());
        let mut level_sigma = sigma;
        for face in &faces {
            let mut cyl_faces = vec![Face::new(n + 1, &[(n, 0)])?];
            let mut cyl_pieces = vec![still.clone()];
            for g in face.facets() {
                cyl_faces.push(cylinder(&g)?);
                cyl_pieces.push(piece_for(&pieces, &g));
            }
            let on_boundary = SmoothMap::glue(cyl_faces, cyl_pieces)?;
            let ext = extend_over_face(
                face,
                on_boundary,
                sigma_prime,
                eps_prime,
                eps_ext,
                sigma,
                sigma_prime,
                cfg,
            )
            .map_err(|e| Error::Precondition(format!("dimension {j}, face {face}: {e}")))?;
            level_sigma = level_sigma.min(ext.sigma);
            pieces.insert(face.clone(), ext.map);
            steps.push(ext.step);
        }
        prev_sigma = level_sigma;
        skeleta.push(SkeletonStep { dim: j, faces: steps });
    }

    let mut glue_faces = Vec::new();
    let mut glue_pieces = Vec::new();
    for face in l.maximal_faces() {
        glue_faces.push(cylinder(face)?);
        glue_pieces.push(still.clone());
    }
    for face in k.maximal_faces() {
        if !l.contains_face(face) {
            glue_faces.push(cylinder(face)?);
            glue_pieces.push(piece_for(&pieces, face));
        }
    }
    let skeleton = Homotopy::new(SmoothMap::glue(glue_faces, glue_pieces)?, kd.clone())?;
    let h = concat_homotopy(&taming, &skeleton, cfg)?;
    let g = h.slice(1.0)?;
    let final_report = check_admissible(&g, &kd, eps, cfg)?;
    let trace = ReplacementTrace {
        eps,
        taming: (sigma0, eps0),
        skeleta,
        final_report,
    };
    Ok((g, h, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SmashParams;
    use crate::tame::max_discrepancy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default().with_grid(17)
    }

    #[test]
    fn chart_of_bottom_edge() {
        let f: Face = "*0".parse().unwrap();
        let c = face_chart(&f).unwrap();
        // (s, w) -> (s, 0, 1 - w)
        assert_eq!(c.forward.eval(&[0.25, 0.0]).unwrap(), vec![0.25, 0.0, 1.0]);
        assert_eq!(c.forward.eval(&[0.25, 1.0]).unwrap(), vec![0.25, 0.0, 0.0]);
        assert_eq!(c.inverse.eval(&[0.25, 0.0, 0.75]).unwrap(), vec![0.25, 0.25]);
        assert!(face_chart(&"01".parse().unwrap()).is_err());
    }

    #[test]
    fn chart_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Face = "1**0".parse().unwrap();
        let c = face_chart(&f).unwrap();
        for _ in 0..50 {
            // dyadic points, where the time flip is exact
            let p: Vec<f64> = (0..3).map(|_| f64::from(rng.gen_range(0..=1u32 << 20)) / f64::from(1u32 << 20)).collect();
            let q = c.inverse.eval(&c.forward.eval(&p).unwrap()).unwrap();
            assert_eq!(p, q);
            let r: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            let q = c.inverse.eval(&c.forward.eval(&r).unwrap()).unwrap();
            assert!(crate::tame::max_gap(&r, &q) <= f64::EPSILON);
        }
    }

    fn poly(n: usize) -> SmoothMap {
        let mut terms = vec![SmoothMap::constant(n, vec![0.2]).unwrap()];
        for k in 0..n {
            let x = SmoothMap::coord(n, k).unwrap();
            let y = SmoothMap::coord(n, (k + 1) % n).unwrap();
            terms.push(SmoothMap::product(vec![x.clone(), x.scale_shift(1.0, 0.3 * k as f64).unwrap(), y]).unwrap());
        }
        SmoothMap::sum(terms).unwrap()
    }

    #[test]
    fn identity_on_interval() {
        let f = SmoothMap::coord(1, 0).unwrap();
        let k = CubicalComplex::full(1);
        let (g, h, trace) = admissible_replace(&f, &k, &CubicalComplex::empty(1), 0.25, &cfg()).unwrap();
        assert!(trace.final_report.passed, "{:?}", trace.final_report);
        assert_eq!(trace.processed_faces(), vec!["*"]);
        let pts = Domain::Complex(k).grid_points(33);
        assert!(max_discrepancy(&h.slice(0.0).unwrap(), &f, &pts).unwrap() <= 1e-9);
        assert!(max_discrepancy(&h.slice(1.0).unwrap(), &g, &pts).unwrap() <= 1e-9);
    }

    #[test]
    fn square_boundary_relative_to_edge() {
        let k = CubicalComplex::boundary(2).unwrap();
        let l = CubicalComplex::single("0*".parse().unwrap());
        // tame on L: depends on t_2 only through T
        let f = SmoothMap::compose(poly(2), SmoothMap::smash(SmashParams::new(0.25, 0.4).unwrap(), 2))
            .unwrap()
            .on_cube();
        let f = SmoothMap::sum(vec![
            f,
            SmoothMap::product(vec![SmoothMap::coord(2, 0).unwrap(), SmoothMap::coord(2, 1).unwrap()]).unwrap(),
        ])
        .unwrap();
        let (g, h, trace) = admissible_replace(&f, &k, &l, 0.25, &cfg()).unwrap();
        assert!(trace.final_report.passed, "{:?}", trace.final_report);
        let faces = trace.processed_faces();
        assert_eq!(faces.len(), 3);
        assert!(!faces.contains(&"0*"));
        let on_l = Domain::Complex(l).grid_points(17);
        for u in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert!(max_discrepancy(&h.slice(u).unwrap(), &f, &on_l).unwrap() <= 1e-9);
        }
        let on_k = Domain::Complex(k.clone()).grid_points(17);
        assert!(max_discrepancy(&h.slice(0.0).unwrap(), &f, &on_k).unwrap() <= 1e-9);
        assert!(max_discrepancy(&h.slice(1.0).unwrap(), &g, &on_k).unwrap() <= 1e-9);
        let fine = cfg().with_grid(33);
        assert!(check_admissible(&g, &Domain::Complex(k), 0.25, &fine).unwrap().passed);
    }

    #[test]
    fn admissible_input_relative_to_itself() {
        let k = CubicalComplex::boundary(2).unwrap();
        let f = SmoothMap::compose(poly(2), SmoothMap::smash(SmashParams::new(0.25, 0.4).unwrap(), 2))
            .unwrap()
            .on_cube();
        let (g, h, trace) = admissible_replace(&f, &k, &k, 0.25, &cfg()).unwrap();
        assert!(trace.processed_faces().is_empty());
        let pts = Domain::Complex(k).grid_points(17);
        assert!(max_discrepancy(&g, &f, &pts).unwrap() <= 1e-9);
        assert!(max_discrepancy(&h.slice(0.6).unwrap(), &f, &pts).unwrap() <= 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let k = CubicalComplex::boundary(2).unwrap();
        let f = SmoothMap::sum(vec![poly(2), SmoothMap::coord(2, 1).unwrap()]).unwrap();
        let l = CubicalComplex::single("0*".parse().unwrap());
        // not admissible on L
        assert!(matches!(admissible_replace(&f, &k, &l, 0.25, &cfg()), Err(Error::Precondition(_))));
        let big = CubicalComplex::full(2);
        assert!(admissible_replace(&f, &k, &big, 0.25, &cfg()).is_err());
        assert!(admissible_replace(&f, &k, &CubicalComplex::empty(2), 0.5, &cfg()).is_err());
    }

    #[test]
    fn vertices_only() {
        let k = CubicalComplex::from_faces(2, ["00".parse().unwrap(), "11".parse().unwrap()]).unwrap();
        let f = poly(2);
        let (g, _, trace) = admissible_replace(&f, &k, &CubicalComplex::empty(2), 0.2, &cfg()).unwrap();
        assert!(trace.final_report.passed);
        assert_eq!(g, f);
    }
}
