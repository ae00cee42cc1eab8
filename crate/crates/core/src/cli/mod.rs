//! Scenario runner: `verify`, `list` and `demo no-retraction`.
//!
//! Exit codes: 0 when everything passes, 1 when any scenario fails, 2 on
//! usage, parse or validation errors.

pub mod registry;
pub mod report;
pub mod runner;
pub mod scenario;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use registry::{list_registry, MapArgs, Registry};
pub use report::{summary_csv, CheckRecord, ScenarioReport, Status};
pub use runner::{
    load_source, prepare_suite, run_prepared, run_scenario, run_source, write_reports, Diagnostic, Overrides, Prepared,
    SuiteError, PAPER_CORE, PAPER_CORE_NAME,
};
pub use scenario::{CheckKind, DomainRef, Expectation, MapRef, Scenario, ScenarioFile};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "detflux", version, about = "Verify Jacobian-determinant integral identities numerically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file, or the built-in `paper-core` suite.
    Verify {
        /// Path to a scenario JSON file, or `paper-core`.
        scenarios: String,
        /// Directory for per-scenario JSON reports and summary.csv.
        #[arg(long, default_value = "detflux-reports")]
        out: PathBuf,
        /// Gauss-Legendre points per axis, overriding every scenario.
        #[arg(long)]
        order: Option<usize>,
        /// Seed for random sample points, overriding every scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Only run scenarios whose id matches this glob.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Print registered domains, maps and checks.
    List,
    /// Standalone demonstrations.
    Demo {
        #[arg(value_enum)]
        which: Demo,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        dim: u8,
        #[arg(long)]
        order: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Demo {
    NoRetraction,
}

fn verify(target: &str, out: PathBuf, overrides: Overrides) -> i32 {
    let reports = load_source(target).and_then(|src| run_source(&src, &Registry::with_builtins(), &overrides));
    let reports = match reports {
        Ok(r) => r,
        Err(e) => {
            eprintln!("detflux: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = write_reports(&reports, &out) {
        eprintln!("detflux: writing {}: {e}", out.display());
        return EXIT_USAGE;
    }
    let mut passed = 0;
    let mut stdout = std::io::stdout().lock();
    for r in &reports {
        passed += usize::from(r.passed());
        let disc = r.max_discrepancy.map(|d| format!("{d:.2e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            stdout,
            "{:<5} {:<40} order {:>2}  max discrepancy {:>9}  {} ms",
            r.status.as_str().to_uppercase(),
            r.scenario,
            r.order,
            disc,
            r.volatile.duration_ms
        );
        for c in r.checks.iter().filter(|c| c.error.is_some()) {
            let _ = writeln!(stdout, "      {}: {}", c.check.name(), c.error.as_deref().unwrap_or_default());
        }
        if let Some(e) = &r.error {
            let _ = writeln!(stdout, "      {e}");
        }
    }
    let _ = writeln!(stdout, "{passed}/{} scenarios passed; reports in {}", reports.len(), out.display());
    if passed == reports.len() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn demo_no_retraction(dim: usize, order: Option<usize>) -> i32 {
    match runner::no_retraction(dim, order) {
        Ok(r) => {
            let mut stdout = std::io::stdout().lock();
            for o in &r.obstruction {
                let _ = writeln!(
                    stdout,
                    "sphere-valued  {:<32} max |det f'| {:.2e} over {} points",
                    o.map, o.max_abs_det, o.samples
                );
            }
            for b in &r.boundary_identity {
                let _ = writeln!(
                    stdout,
                    "boundary = id  {:<32} integrals {:.12} / {:.12} / {:.12}  max error {:.2e}",
                    b.map, b.triple.via_volume, b.triple.via_flux, b.triple.via_form, b.max_error
                );
            }
            let _ = writeln!(stdout, "{}", r.statement);
            if r.holds() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("detflux: {e}");
            EXIT_FAIL
        }
    }
}

/// Entry point shared by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match cli.command {
        Command::Verify { scenarios, out, order, seed, filter } => {
            let filter = match filter.as_deref().map(glob::Pattern::new).transpose() {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("detflux: --filter: {e}");
                    return EXIT_USAGE;
                }
            };
            verify(&scenarios, out, Overrides { order, seed, filter })
        }
        Command::List => {
            let _ = write!(std::io::stdout(), "{}", list_registry());
            EXIT_PASS
        }
        Command::Demo { which: Demo::NoRetraction, dim, order } => demo_no_retraction(dim.into(), order),
    }
}
