//! Drives a command from an in-memory configuration, as the binary does from a file.

use voxform::cli::{run, select_suites, Command, FaultSet, RunConfig};

const CONFIG: &str = "\
[voa]
cutoff = 6
level = 12

[sewing]
epsilon = 1/64, 1/16, 1/4
zeta1 = 1/4

[run]
suites = sweep
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::parse(CONFIG)?;
    let suites = select_suites(Command::Product, &cfg, None)?;
    let out = run(Command::Product, &cfg, &suites, &FaultSet::default());
    println!("{}", out.summary());
    print!("{}", out.csv.clone().unwrap_or_default().lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    std::process::exit(out.exit_code());
}
