//! Homotoping a map on the boundary of the cube, relative to one facet, to an
//! admissible map.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tamecube::cubelat::{CubicalComplex, Domain, Face};
use tamecube::replace::admissible_replace;
use tamecube::suite::random_map_tame_on_first_face;
use tamecube::tame::{check_admissible, max_discrepancy, sample_points, ToleranceConfig};

fn main() -> tamecube::Result<()> {
    let cfg = ToleranceConfig::default();
    let eps = 0.2;
    let k = CubicalComplex::boundary(3)?;
    let l = CubicalComplex::single(Face::new(3, &[(0, 0)])?);
    let f = random_map_tame_on_first_face(3, eps, &mut ChaCha8Rng::seed_from_u64(1))?;

    let kd = Domain::Complex(k.clone());
    println!("f admissible before: {}", check_admissible(&f, &kd, eps, &cfg)?.passed);
    let (g, h, trace) = admissible_replace(&f, &k, &l, eps, &cfg)?;
    println!("g admissible after:  {}", trace.final_report.passed);

    for step in &trace.skeleta {
        let faces: Vec<&str> = step.faces.iter().map(|s| s.face.as_str()).collect();
        println!("dim {}: {faces:?} sigma {}", step.dim, step.faces[0].params.sigma);
    }
    let on_l = sample_points(&Domain::Complex(l), &cfg);
    let drift = [0.0, 0.5, 1.0]
        .iter()
        .map(|&u| max_discrepancy(&h.slice(u).unwrap(), &f, &on_l).unwrap())
        .fold(0.0, f64::max);
    println!("H moves points of L by at most {drift:e}");
    println!("g(0.5, 0.5, 1) = {:?}", g.eval(&[0.5, 0.5, 1.0])?);
    println!("final report: {}", trace.final_report.to_json());
    Ok(())
}
