//! The approximate retraction onto J^{n-1} and the deformation homotopy.
//!
//! Prints R in map syntax, so `tamecube sample --map r.txt` can plot it:
//!
//! ```text
//! cargo run --example retraction > r.txt
//! ```

use tamecube::fnexpr::serialize_map;
use tamecube::retract::{approx_retraction, deformation_retraction_homotopy, DeformationParams, RetractionParams};

fn main() -> tamecube::Result<()> {
    let p = RetractionParams::from_eps(2, 0.3)?;
    let r = approx_retraction(&p)?;
    for x in [[0.5, 1.0], [0.5, 0.0], [0.05, 0.4], [0.3, 0.1]] {
        eprintln!("R{x:?} = {:?}", r.eval(&x)?);
    }
    eprintln!("swapped eps' and eps: {:?}", RetractionParams::new(2, 0.3, 0.1, 0.4).unwrap_err());

    let d = DeformationParams::new(2, 0.3)?;
    eprintln!("\ndeformation uses {:?}", d);
    let h = deformation_retraction_homotopy(2, 0.3)?;
    for u in [0.0, 0.5, 1.0] {
        eprintln!("h((0.4, 0.6), {u}) = {:?}", h.eval(&[0.4, 0.6], u)?);
    }

    println!("{}", serialize_map(&r));
    Ok(())
}
