//! `kingsline`: run the verification suites, dump the geometry, print exact
//! protocol tables and simulate the Mean King game.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad arguments, 3 I/O error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kingsline::{Backend, BasisLabel, DeductionRule, Line, Preparation, PrimeModulus};

use crate::output::CliError;

#[derive(Parser, Debug)]
#[command(name = "kingsline", version, about = "Exact MUB geometry and Mean King protocol tool")]
struct Cli {
    /// Output directory [env: KINGSLINE_OUT_DIR, default: .]
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Write the lines-to-points JSON and the 0/1 incidence CSV.
    Geometry(GeometryArgs),
    /// Write exact outcome tables for one preparation.
    Oracle(OracleArgs),
    /// Monte Carlo run of the protocol with JSON-lines transcripts.
    Simulate(SimulateArgs),
    /// Exact per-(line, basis) results of the literal deduction rule.
    Findings(FindingsArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated odd primes.
    #[arg(long = "d", value_delimiter = ',', required = true, value_parser = parse_prime)]
    d: Vec<PrimeModulus>,
    #[arg(long, default_value = "exact", value_parser = parse_backend)]
    backend: Backend,
    /// Float backend only.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Also compare the exact and float backends.
    #[arg(long)]
    coherence: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GeometryArgs {
    #[arg(long = "d", value_parser = parse_prime)]
    d: PrimeModulus,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long = "d", value_parser = parse_prime)]
    d: PrimeModulus,
    /// `balanced` or a line `MDD,M0`.
    #[arg(long, default_value = "balanced")]
    prep: String,
    /// One basis (`CB` or 0..d-1); all bases when omitted.
    #[arg(long)]
    basis: Option<String>,
    /// Undo the line-state rotation on particle 2 before the control
    /// measurement.
    #[arg(long)]
    undo_rotation: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RuleArg {
    Line,
    Literal,
}

impl From<RuleArg> for DeductionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Line => DeductionRule::LineRule,
            RuleArg::Literal => DeductionRule::Literal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long = "d", value_parser = parse_prime)]
    d: PrimeModulus,
    #[arg(long, default_value = "balanced")]
    prep: String,
    #[arg(long, value_enum, default_value = "line")]
    rule: RuleArg,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Generated and printed when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores, 1 = sequential).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    undo_rotation: bool,
    /// Summary format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    transcripts: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FindingsArgs {
    #[arg(long = "d", value_delimiter = ',', required = true, value_parser = parse_prime)]
    d: Vec<PrimeModulus>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_prime(s: &str) -> Result<PrimeModulus, String> {
    let n: u32 = s.trim().parse().map_err(|_| format!("{s:?} is not an integer"))?;
    PrimeModulus::new(n).map_err(|e| e.to_string())
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

fn parse_prep(p: PrimeModulus, s: &str) -> Result<Preparation, CliError> {
    if s == "balanced" {
        return Ok(Preparation::Balanced);
    }
    let body = s.strip_prefix("line:").unwrap_or(s);
    let parts: Vec<&str> = body.split(',').collect();
    let bad = || CliError::Usage(format!("preparation {s:?}: expected `balanced` or `MDD,M0`"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let a: i64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: i64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !(0..p.get() as i64).contains(&a) || !(0..p.get() as i64).contains(&b) {
        return Err(CliError::Usage(format!("line ({a},{b}) out of range for d = {}", p.get())));
    }
    Ok(Preparation::LineVector(Line::new(p.residue(a), p.residue(b))))
}

fn parse_basis(p: PrimeModulus, s: &str) -> Result<BasisLabel, CliError> {
    BasisLabel::parse(p, s).ok_or_else(|| CliError::Usage(format!("basis {s:?}: expected CB or 0..{}", p.get() - 1)))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let dir = output::out_dir(cli.out_dir);
    match cli.command {
        Command::Verify(a) => commands::verify(&dir, &a.d, a.backend, a.tol, a.coherence, a.out),
        Command::Geometry(a) => commands::geometry(&dir, a.d, a.json, a.csv),
        Command::Oracle(a) => {
            let prep = parse_prep(a.d, &a.prep)?;
            let basis = a.basis.as_deref().map(|s| parse_basis(a.d, s)).transpose()?;
            commands::oracle(&dir, a.d, prep, basis, a.undo_rotation, a.out)
        }
        Command::Simulate(a) => {
            let prep = parse_prep(a.d, &a.prep)?;
            let seed = a.seed.unwrap_or_else(rand::random);
            if a.seed.is_none() {
                eprintln!("seed: {seed}");
            }
            commands::simulate(
                &dir,
                commands::SimulateConfig {
                    p: a.d,
                    prep,
                    rule: a.rule.into(),
                    trials: a.trials,
                    seed,
                    threads: a.threads,
                    undo_rotation: a.undo_rotation,
                    csv: a.format == Format::Csv,
                    transcripts: a.transcripts,
                    summary: a.summary,
                },
            )
        }
        Command::Findings(a) => commands::findings(&dir, &a.d, a.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
