//! Concatenating homotopies and composing cubes along the first axis.

use tamecube::cubelat::{CubicalComplex, Domain};
use tamecube::fnexpr::{seam_check, DEFAULT_FD_STEP};
use tamecube::suite::boundary_bump;
use tamecube::tame::{concat_homotopy, concat_maps, homotopy_seam, tame_replace, ToleranceConfig};

fn main() -> tamecube::Result<()> {
    let cfg = ToleranceConfig::default();
    let k = CubicalComplex::full(2);
    let f = tamecube::fnexpr::parse_map("(map 2 (prod (coord 1) (sum (coord 2) (const 1))))")?;
    let (g, first) = tame_replace(&f, &k, 0.1, 0.2)?;
    let (_, second) = tame_replace(&g, &k, 0.05, 0.1)?;
    let both = concat_homotopy(&first, &second, &cfg)?;
    let seam = homotopy_seam(&both, &cfg)?;
    println!("F * G seam: value gap {:e}, slope gap {:e}", seam.value_gap, seam.slope_gap);

    // elements of pi_2: maps sending the boundary to 0
    let phi = boundary_bump(2, 1.0, 0.25)?;
    let psi = boundary_bump(2, -0.5, 0.25)?;
    let prod = concat_maps(&phi, &psi, &cfg)?;
    for t1 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("(phi * psi)({t1}, 0.5) = {:?}", prod.eval(&[t1, 0.5])?);
    }
    let grid = Domain::Complex(k).grid_points(9);
    let seam = seam_check(&prod, &grid, DEFAULT_FD_STEP)?;
    println!("seam at t1 = 1/2: value gap {:e}, slope gap {:e}", seam.value_gap, seam.slope_gap);
    Ok(())
}
