//! Replacing a map by a tame one, f ∘ T^n, with the straight homotopy.

use tamecube::cubelat::{chamber_region, CubicalComplex, Domain};
use tamecube::fnexpr::parse_map;
use tamecube::tame::{check_tame, max_discrepancy, sample_points, tame_replace, ToleranceConfig};

fn main() -> tamecube::Result<()> {
    let cfg = ToleranceConfig::default();
    let k = CubicalComplex::boundary(2)?;
    let kd = Domain::Complex(k.clone());
    let f = parse_map("(map 2 (sum (prod (coord 1) (coord 1)) (prod (const 0.5) (coord 2))))")?;
    println!("f 0.1-tame on the square boundary? {}", check_tame(&f, &kd, 0.1, &cfg)?.passed);

    let (g, h) = tame_replace(&f, &k, 0.1, 0.25)?;
    println!("g 0.1-tame? {}", check_tame(&g, &kd, 0.1, &cfg)?.passed);

    let chamber = sample_points(&Domain::Boxes(chamber_region(&k, 0.25)?), &cfg);
    for u in [0.0, 0.5, 1.0] {
        let d = max_discrepancy(&h.slice(u)?, &f, &chamber)?;
        println!("|H(., {u}) - f| on the 0.25-chamber: {d:e}");
    }
    Ok(())
}
