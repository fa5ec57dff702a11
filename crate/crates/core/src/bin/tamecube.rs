use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use tamecube::suite::{report_schema_version, run_suite, sample_map, Suite, SuiteConfig};
use tamecube::tame::ToleranceConfig;
use tamecube::Error;

const USAGE: u8 = 2;
const IO: u8 = 3;

#[derive(Parser)]
#[command(name = "tamecube", version, about = "Verify smash functions, tame maps and retractions on cubes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write a JSON report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long = "eq-tol")]
        eq_tol: Option<f64>,
        #[arg(long = "deriv-tol")]
        deriv_tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a map over the unit-cube grid as CSV.
    Sample {
        /// Map text, or a file containing it.
        #[arg(long)]
        map: String,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the report schema version.
    Schema,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("tamecube: {msg}");
    ExitCode::from(code)
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), std::io::Error> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn limit_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TAMECUBE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("TAMECUBE_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = limit_threads() {
        return fail(USAGE, e);
    }
    match cli.command {
        Command::Schema => {
            println!("{}", report_schema_version());
            ExitCode::SUCCESS
        }
        Command::Verify {
            suite,
            n,
            eps,
            grid,
            eq_tol,
            deriv_tol,
            seed,
            out,
        } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => return fail(USAGE, e),
            };
            let defaults = ToleranceConfig::default();
            let cfg = SuiteConfig {
                suite,
                ns: n,
                eps,
                tol: ToleranceConfig {
                    eq_tol: eq_tol.unwrap_or(defaults.eq_tol),
                    deriv_tol: deriv_tol.unwrap_or(defaults.deriv_tol),
                    grid_res: grid.unwrap_or(defaults.grid_res),
                    seed: seed.unwrap_or(defaults.seed),
                },
            };
            let report = match run_suite(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(USAGE, e),
            };
            let timestamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            if let Err(e) = write_out(out.as_deref(), &report.to_json(timestamp)) {
                return fail(IO, e);
            }
            eprintln!(
                "{} properties, {} failed",
                report.results.len(),
                report.failures
            );
            for r in report.results.iter().filter(|r| !r.passed) {
                eprintln!("FAIL {}::{} {}", r.suite, r.property, r.params);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Command::Sample { map, grid, out } => {
            let path = Path::new(&map);
            let text = if path.is_file() {
                match std::fs::read_to_string(path) {
                    Ok(t) => t,
                    Err(e) => return fail(IO, format!("{}: {e}", path.display())),
                }
            } else {
                map
            };
            let csv = match sample_map(&text, grid) {
                Ok(c) => c,
                Err(e @ (Error::Parse { .. } | Error::Dimension { .. } | Error::Params(_))) => {
                    return fail(USAGE, e)
                }
                Err(e) => return fail(1, e),
            };
            match write_out(out.as_deref(), &csv) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(IO, e),
            }
        }
    }
}
