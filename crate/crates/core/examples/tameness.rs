//! Checking tameness, admissibility and fiber constancy on a grid.

use tamecube::cubelat::{CubicalComplex, Domain};
use tamecube::fnexpr::{parse_map, SmoothMap};
use tamecube::tame::{check_admissible, check_fiber_constant, check_tame, ToleranceConfig};

fn main() -> tamecube::Result<()> {
    let cfg = ToleranceConfig::default();
    let cube = Domain::Complex(CubicalComplex::full(1));

    let id = SmoothMap::coord(1, 0)?;
    for eps in [0.05, 0.1, 0.25] {
        let r = check_tame(&id, &cube, eps, &cfg)?;
        let w = r.witness.as_ref().expect("identity is not tame");
        println!("identity at eps={eps}: worst {:.6} at t = {:.6}", r.worst_violation, w.point[0]);
    }

    // constant on [0, 0.2] and [0.8, 1]
    let bump = parse_map("(lambda (affine [[1.6666666666666667]] [-0.33333333333333337]))")?;
    println!("\nlambda((t-0.2)/0.6) 0.2-tame? {}", check_tame(&bump, &cube, 0.2, &cfg)?.passed);
    println!("lambda((t-0.2)/0.6) 0.3-tame? {}", check_tame(&bump, &cube, 0.3, &cfg)?.passed);

    let square = Domain::Complex(CubicalComplex::full(2));
    let first = SmoothMap::coord(2, 0)?;
    let r = check_admissible(&first, &square, 0.2, &cfg)?;
    println!("\n(t1, t2) -> t1 admissible? {} (witness {:?})", r.passed, r.witness);
    println!("report: {}", r.to_json());

    let t = parse_map("(map 2 (smash 0.1 0.3 (tuple (coord 1) (coord 2))))")?;
    println!("\nT^2 factors through T^2? {}", check_fiber_constant(&t, 0.1, 0.3, &cfg)?.passed);
    Ok(())
}
