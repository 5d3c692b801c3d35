use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use voxform::cli::{run, select_suites, CliError, Command, FaultSet, RunConfig};

#[derive(Parser)]
#[command(name = "voxform", version, about = "Exact checks for free-boson correlator forms, sewing products and their cochain complex")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write level coefficients and tail bounds as CSV (product only).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Comma-separated suites to run; an empty value runs none.
    #[arg(long, global = true, value_delimiter = ',', num_args = 0..)]
    suite: Option<Vec<String>>,
    /// Deliberately corrupt a computation.
    #[arg(long = "inject-fault", global = true)]
    inject_fault: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Vertex algebra axioms and the invariant form.
    Axioms,
    /// ε-product sweep, decay certificates and product properties.
    Product,
    /// Coboundary, shuffles, Leibniz rule and the exceptional complex.
    Complex,
    /// Coordinate changes and form invariance.
    Coords,
    /// Sewing-domain validation.
    Sewing,
}

fn execute(args: &Args) -> Result<i32, CliError> {
    let command = match args.command {
        Cmd::Axioms => Command::Axioms,
        Cmd::Product => Command::Product,
        Cmd::Complex => Command::Complex,
        Cmd::Coords => Command::Coords,
        Cmd::Sewing => Command::Sewing,
    };
    let cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let faults = FaultSet::parse(&args.inject_fault)?;
    let suites = select_suites(command, &cfg, args.suite.as_deref())?;
    let start = Instant::now();
    let outcome = run(command, &cfg, &suites, &faults);
    let json = outcome.to_json();
    match &args.out {
        Some(p) => std::fs::write(p, &json).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{json}"),
    }
    if let (Some(p), Some(text)) = (&args.csv, &outcome.csv) {
        std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    for c in outcome.report.failures() {
        eprintln!("FAIL {}: {} (residual {}, bound {}) {}", c.id, c.anchor, c.residual, c.bound, c.detail);
    }
    eprintln!("{} in {:.2}s", outcome.summary(), start.elapsed().as_secs_f64());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
