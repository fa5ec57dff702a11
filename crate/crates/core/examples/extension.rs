//! Extending a tame map on J^{n-1} over the whole cube, and over J_delta.

use tamecube::cubelat::{CubicalComplex, Domain, Face};
use tamecube::fnexpr::parse_map;
use tamecube::tame::{
    check_tame, extend_tame, extend_to_jdelta, max_discrepancy, sample_points, ExtensionParams,
    ToleranceConfig,
};

fn main() -> tamecube::Result<()> {
    let cfg = ToleranceConfig::default();
    // 0.3-tame on all of I^2
    let f = parse_map(
        "(map 2 (compose (sum (coord 1) (prod (coord 1) (coord 2)) (lambda (coord 2)))
                         (smash 0.3 0.45 (tuple (coord 1) (coord 2)))))",
    )?;
    let p = ExtensionParams::from_tameness(0.3, 0.1)?;
    println!("{p:?}");
    let g = extend_tame(&f, &p, &cfg)?;

    let j = Domain::Complex(CubicalComplex::j_complex(2)?);
    let cube = Domain::Complex(CubicalComplex::full(2));
    let bottom = Domain::Complex(CubicalComplex::single(Face::new(2, &[(1, 0)])?));
    println!("|g - f| on J^1: {:e}", max_discrepancy(&g, &f, &sample_points(&j, &cfg))?);
    println!("g {}-tame on I^2? {}", p.sigma, check_tame(&g, &cube, p.sigma, &cfg)?.passed);
    println!("g {}-tame on the bottom? {}", p.sigma_prime, check_tame(&g, &bottom, p.sigma_prime, &cfg)?.passed);

    let (fe, region) = extend_to_jdelta(&f, 0.3, &cfg)?;
    println!("\nJ_delta region: {} boxes", region.boxes().len());
    println!("f_eps(0.1, 0) = {:?} = f(0, 0) = {:?}", fe.eval(&[0.1, 0.0])?, f.eval(&[0.0, 0.0])?);
    Ok(())
}
