use std::io::Write;
use std::process::ExitCode;

use charge_bounds::{parse_family, run, Format, RunConfig};
use charge_core::FamilyKind;
use clap::Parser;

/// Certified exact bounds on the probability of an integer set under
/// charges uniform on prime residue classes.
#[derive(Debug, Parser)]
#[command(name = "charge-bounds", version)]
struct Args {
    /// Set expression, e.g. `primes`, `class(1,6)`, `!{5}`, `primes & class(1,4)`.
    expression: String,

    /// Highest level (number of primes constrained).
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    max_level: u64,

    /// `pr` or a comma-separated list of moduli.
    #[arg(long, default_value = "pr", value_parser = parse_family)]
    family: FamilyKind,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Emit LP primal and dual optima.
    #[arg(long)]
    certificates: bool,

    /// Emit the path multisets behind the lower bounds.
    #[arg(long)]
    witnesses: bool,

    /// Add decimal approximations, labeled non-authoritative.
    #[arg(long)]
    approx: bool,

    /// Largest LP row count to solve; larger levels report no upper bound.
    #[arg(long)]
    cap_rows: Option<u64>,

    /// Override the highest permitted level.
    #[arg(long)]
    level_cap: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = RunConfig {
        expression: args.expression,
        max_level: args.max_level as usize,
        family: args.family,
        format: args.format,
        emit_certificates: args.certificates,
        emit_witnesses: args.witnesses,
        approx: args.approx,
        cap_rows: args.cap_rows,
        level_cap: args.level_cap,
    };
    let out = run(&config);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
