use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tamecube::cubelat::{chamber_region, CubicalComplex, Domain, Face, MEMBERSHIP_TOL};
use tamecube::fnexpr::{parse_map, serialize_map, SmoothMap};
use tamecube::kernels::{lambda, smash_t, QuadratureConfig, SmashParams};
use tamecube::retract::{approx_retraction, RetractionParams};
use tamecube::suite::{compatible_homotopies, random_map_text, random_tame_map};
use tamecube::tame::{
    check_admissible, check_tame, concat_homotopy, homotopy_seam, max_discrepancy, sample_points,
    tame_replace, ToleranceConfig,
};

fn smash_params() -> impl Strategy<Value = SmashParams> {
    (0.0f64..0.45, 0.01f64..1.0).prop_map(|(sigma, frac)| {
        let tau = sigma + (0.5 - sigma) * frac;
        SmashParams::new(sigma, tau.max(sigma + 1e-3).min(0.5)).unwrap()
    })
}

fn face(n: usize) -> impl Strategy<Value = Face> {
    prop::collection::vec(prop_oneof![Just(None), Just(Some(0u8)), Just(Some(1u8))], n).prop_map(move |pins| {
        let pins: Vec<(usize, u8)> = pins.iter().enumerate().filter_map(|(i, a)| a.map(|a| (i, a))).collect();
        Face::new(n, &pins).unwrap()
    })
}

fn complex(n: usize) -> impl Strategy<Value = CubicalComplex> {
    prop::collection::vec(face(n), 0..4).prop_map(move |faces| CubicalComplex::from_faces(n, faces).unwrap())
}

fn coarse() -> ToleranceConfig {
    ToleranceConfig::default().with_grid(9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lambda_is_symmetric_and_monotone(a in -0.5f64..1.5, b in -0.5f64..1.5) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!((lambda(1.0 - a).unwrap() - (1.0 - lambda(a).unwrap())).abs() <= 1e-12);
        prop_assert!(lambda(lo).unwrap() <= lambda(hi).unwrap() + 1e-12);
    }

    #[test]
    fn smash_is_symmetric_monotone_and_fixes_the_middle(p in smash_params(), a in -0.5f64..1.5, b in -0.5f64..1.5) {
        let q = QuadratureConfig::default();
        let t = |x: f64| smash_t(p, x, &q).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!((t(1.0 - a) - (1.0 - t(a))).abs() <= 1e-9);
        prop_assert!(t(lo) <= t(hi) + 1e-9);
        prop_assert!((t(0.5) - 0.5).abs() <= 1e-9);
        if (p.tau()..=1.0 - p.tau()).contains(&a) {
            prop_assert!((t(a) - a).abs() <= 1e-9);
        }
        if a <= p.sigma() {
            prop_assert_eq!(t(a), 0.0);
        }
    }

    #[test]
    fn complexes_are_downward_closed(k in complex(3)) {
        for f in k.all_faces() {
            prop_assert!(k.contains(&f.center(), MEMBERSHIP_TOL));
            for sub in f.subfaces() {
                prop_assert!(k.contains_face(&sub));
            }
        }
    }

    #[test]
    fn chambers_lie_inside_their_complex(k in complex(2), eps in 0.01f64..0.49) {
        let chamber = Domain::Boxes(chamber_region(&k, eps).unwrap());
        for p in chamber.grid_points(9) {
            prop_assert!(k.contains(&p, MEMBERSHIP_TOL), "{:?} escapes {}", p, k);
        }
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = parse_map(&random_map_text(n, m, &mut rng)).unwrap();
        let g = parse_map(&serialize_map(&f)).unwrap();
        prop_assert_eq!(serialize_map(&g), serialize_map(&f));
        for p in Domain::Complex(CubicalComplex::full(n)).random_points(100, &mut rng) {
            prop_assert_eq!(f.eval(&p).unwrap(), g.eval(&p).unwrap());
        }
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = parse_map(&random_map_text(2, 2, &mut rng)).unwrap();
        let g = parse_map(&random_map_text(2, 2, &mut rng)).unwrap();
        let f = parse_map(&random_map_text(2, 1, &mut rng)).unwrap();
        let left = SmoothMap::compose(SmoothMap::compose(f.clone(), g.clone()).unwrap(), h.clone()).unwrap();
        let right = SmoothMap::compose(f, SmoothMap::compose(g, h).unwrap()).unwrap();
        for p in Domain::Complex(CubicalComplex::full(2)).random_points(20, &mut rng) {
            prop_assert_eq!(left.eval(&p).unwrap(), right.eval(&p).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tameness_is_monotone_in_eps(seed in any::<u64>(), n in 1usize..=2, shrink in 0.05f64..1.0) {
        let cfg = coarse();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = 0.3;
        let f = random_tame_map(n, 1, eps, &mut rng).unwrap();
        let cube = Domain::Complex(CubicalComplex::full(n));
        prop_assert!(check_tame(&f, &cube, eps, &cfg).unwrap().passed);
        prop_assert!(check_tame(&f, &cube, eps * shrink, &cfg).unwrap().passed);
        prop_assert!(check_admissible(&f, &cube, eps, &cfg).unwrap().passed);
    }

    #[test]
    fn tame_maps_agreeing_on_the_chamber_coincide(seed in any::<u64>(), n in 1usize..=2, inner in 0.01f64..0.19) {
        // b is a reparametrised copy of a; both are sigma-tame and equal on K(sigma)
        let cfg = coarse();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = parse_map(&random_map_text(n, 1, &mut rng)).unwrap();
        let k = CubicalComplex::full(n);
        let sigma = 0.2;
        let (a, _) = tame_replace(&f, &k, sigma, 0.3).unwrap();
        let b = SmoothMap::compose(a.clone(), SmoothMap::smash(SmashParams::new(inner, sigma).unwrap(), n)).unwrap();
        prop_assert!(check_tame(&b, &Domain::Complex(k.clone()), sigma, &cfg).unwrap().passed);
        let chamber = sample_points(&Domain::Boxes(chamber_region(&k, sigma).unwrap()), &cfg);
        prop_assert!(max_discrepancy(&a, &b, &chamber).unwrap() <= cfg.eq_tol);
        let all = sample_points(&Domain::Complex(k), &cfg);
        prop_assert!(max_discrepancy(&a, &b, &all).unwrap() <= cfg.eq_tol);
    }

    #[test]
    fn retraction_lands_in_j_and_fixes_the_chamber(n in 1usize..=3, eps in 0.05f64..0.45) {
        let r = approx_retraction(&RetractionParams::from_eps(n, eps).unwrap()).unwrap();
        let j = CubicalComplex::j_complex(n).unwrap();
        for x in Domain::Complex(CubicalComplex::full(n)).grid_points(7) {
            prop_assert!(j.contains(&r.eval(&x).unwrap(), 1e-9));
        }
        for x in Domain::Boxes(chamber_region(&j, eps).unwrap()).grid_points(7) {
            let y = r.eval(&x).unwrap();
            prop_assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-12));
        }
    }

    #[test]
    fn concatenation_is_smooth_at_the_seam(seed in any::<u64>(), n in 1usize..=2) {
        let cfg = coarse();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = compatible_homotopies(n, 0.25, &mut rng).unwrap();
        let c = concat_homotopy(&a, &b, &cfg).unwrap();
        let seam = homotopy_seam(&c, &cfg).unwrap();
        prop_assert!(seam.passed(cfg.eq_tol, cfg.deriv_tol), "{:?}", seam);
        let base = sample_points(a.base(), &cfg);
        for x in &base {
            prop_assert!(max_gap(&c.eval(x, 0.0).unwrap(), &a.eval(x, 0.0).unwrap()) <= cfg.eq_tol);
            prop_assert!(max_gap(&c.eval(x, 1.0).unwrap(), &b.eval(x, 1.0).unwrap()) <= cfg.eq_tol);
        }
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn j_complex_and_bottom_face_make_the_boundary() {
    for n in 1..=3 {
        let j = CubicalComplex::j_complex(n).unwrap();
        let bottom = CubicalComplex::single(Face::new(n, &[(n - 1, 0)]).unwrap());
        let union = j.union(&bottom).unwrap();
        let boundary = CubicalComplex::boundary(n).unwrap();
        for p in Domain::Complex(CubicalComplex::full(n)).grid_points(33) {
            assert_eq!(
                union.contains(&p, MEMBERSHIP_TOL),
                boundary.contains(&p, MEMBERSHIP_TOL),
                "{p:?}"
            );
        }
    }
}
