//! The flat function, the smooth step and the smash function.

use tamecube::kernels::{gamma, lambda, smash_f, smash_t, QuadratureConfig, SmashParams};

fn main() -> tamecube::Result<()> {
    println!("gamma(1) = {}", gamma(1.0)?);
    for t in [-0.5, 0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("lambda({t:5}) = {:.12}", lambda(t)?);
    }

    let q = QuadratureConfig::default();
    let p = SmashParams::new(0.1, 0.25)?;
    println!("\nT with sigma = {}, tau = {}", p.sigma(), p.tau());
    for i in 0..=20 {
        let t = i as f64 / 20.0;
        println!("  T({t:.2}) = {:.12}", smash_t(p, t, &q)?);
    }
    // F(1) = 1 is what makes T continuous at 1/2
    println!("F(1 - 1e-12) = {:.15}", smash_f(p, 1.0 - 1e-12, &q)?);
    Ok(())
}
