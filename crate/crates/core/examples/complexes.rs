//! Faces, cubical complexes and the regions the constructions live on.

use tamecube::cubelat::{chamber_region, j_delta_region, CubicalComplex, Domain, Face};

fn main() -> tamecube::Result<()> {
    let edge: Face = "0*1".parse()?;
    println!("{edge}: dim {}, free axes {:?}", edge.dim(), edge.free_axes());
    println!("facets: {:?}", edge.facets().iter().map(|f| f.to_string()).collect::<Vec<_>>());

    let j: CubicalComplex = "J:3".parse()?;
    println!("\nJ^2 in I^3 = {j}");
    println!("contains (0.5, 0.5, 0)? {}", j.contains(&[0.5, 0.5, 0.0], 1e-12));
    println!("contains (0, 0.5, 0)?   {}", j.contains(&[0.0, 0.5, 0.0], 1e-12));

    let sk: CubicalComplex = "skeleton:boundary:3:1".parse()?;
    println!("1-skeleton of the cube boundary: {} edges", sk.faces_of_dim(1).len());

    let chamber = chamber_region(&j, 0.2)?;
    println!("\n0.2-chamber of J^2: {} boxes", chamber.boxes().len());
    let jd = j_delta_region(3, 0.04)?;
    println!("J^2_delta with delta = 0.04: {} boxes", jd.boxes().len());

    let grid = Domain::Complex(j).grid_points(5);
    println!("5-point grid on J^2 has {} points", grid.len());
    Ok(())
}
