//! Writing maps as text, evaluating them, and probing derivatives.

use tamecube::fnexpr::{fd_partial, parse_map, seam_check, serialize_map, SmoothMap, DEFAULT_FD_STEP};

fn main() -> tamecube::Result<()> {
    let f = parse_map(
        "(map 2 (tuple (lambda (coord 1))
                       (prod (coord 1) (smash 0.1 0.3 (coord 2)))))",
    )?;
    println!("in {} out {}", f.in_dim(), f.out_dim());
    println!("f(0.5, 0.2) = {:?}", f.eval(&[0.5, 0.2])?);
    println!("canonical form: {}", serialize_map(&f));
    assert_eq!(parse_map(&serialize_map(&f))?, f);

    println!("d/dt1 at (0.5, 0.2): {:?}", fd_partial(&f, &[0.5, 0.2], 0, DEFAULT_FD_STEP)?);

    match parse_map("(map 2 (sum (coord 1) (coord 3)))") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }

    // a piecewise map with a smooth seam: lambda is flat at 0
    let x = SmoothMap::coord(1, 0)?;
    let zero = SmoothMap::constant(1, vec![0.0])?;
    let bump = x.scale_shift(2.0, -1.0)?.then(SmoothMap::lambda(1))?;
    let pw = SmoothMap::piecewise(0, vec![0.5], vec![zero, bump])?;
    let seam = seam_check(&pw, &[vec![0.0]], DEFAULT_FD_STEP)?;
    println!("seam value gap {:e}, slope gap {:e}", seam.value_gap, seam.slope_gap);
    Ok(())
}
