//! Running a verification battery from code and sampling a map to CSV.

use tamecube::suite::{run_suite, sample_map, Suite, SuiteConfig};

fn main() -> tamecube::Result<()> {
    let mut cfg = SuiteConfig::new(Suite::Retract);
    cfg.ns = vec![2];
    cfg.eps = vec![0.25];
    let report = run_suite(&cfg)?;
    for r in &report.results {
        println!("{:32} worst {:>10.3e}  {}", r.property, r.worst.unwrap_or(f64::NAN), if r.passed { "ok" } else { "FAIL" });
    }
    println!("exit code would be {}", report.exit_code());

    print!("\n{}", sample_map("(lambda (coord 1))", 5)?);
    Ok(())
}
