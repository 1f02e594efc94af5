//! `fdchk`: batch front-end for the dissipativity toolkit.
//!
//! Exit codes: 0 when a verdict or report was produced (whatever it says),
//! 2 on configuration or parse errors, 3 on numerical failures.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Inputs;
use report::Format;

#[derive(Parser)]
#[command(name = "fdchk", version, about = "Functional dissipativity checks for ∇·(A∇u) with complex A")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the admissibility conditions of a weight φ.
    PhiValidate(Common),
    /// Compute λ₀ for a weight φ.
    PhiLambda0(Common),
    /// Run the algebraic criteria on the configured matrix.
    OpCheck(Common),
    /// Search for a test function that violates dissipativity.
    OpProbe(Common),
    /// Backward-Euler evolution with Orlicz norm tracking.
    Evolve(Common),
    /// Regenerate the reference reproductions into the --out directory.
    Examples(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (directory for `examples`); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Weight shorthand `builtin:NAME[:p=VALUE]`, overriding [phi].
    #[arg(long)]
    phi: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Probe evaluation budget.
    #[arg(long)]
    budget: Option<usize>,
    /// Criterion margin tolerance, or solver tolerance for `evolve`.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid size `N` or `NxM`.
    #[arg(long)]
    grid: Option<String>,
    /// Leave the timestamp out so reports are byte-for-byte reproducible.
    #[arg(long)]
    no_timestamp: bool,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<fdchk_core::Error> for Failure {
    fn from(e: fdchk_core::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (name, c) = match &cli.command {
        Command::PhiValidate(c) => ("phi-validate", c),
        Command::PhiLambda0(c) => ("phi-lambda0", c),
        Command::OpCheck(c) => ("op-check", c),
        Command::OpProbe(c) => ("op-probe", c),
        Command::Evolve(c) => ("evolve", c),
        Command::Examples(c) => ("examples", c),
    };
    let inputs =
        Inputs::load(c.config.as_deref(), c.phi.clone(), c.seed, c.budget, c.tol, c.grid.as_deref(), !c.no_timestamp)?;
    let report = match name {
        "phi-validate" => commands::phi_validate(&inputs)?,
        "phi-lambda0" => commands::phi_lambda0(&inputs)?,
        "op-check" => commands::op_check(&inputs)?,
        "op-probe" => commands::op_probe(&inputs)?,
        "evolve" => commands::evolve(&inputs)?,
        _ => {
            let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("fdchk-examples"));
            let summary = commands::examples(&inputs, &dir, c.format)?;
            print!("{}", summary.render(c.format));
            return Ok(());
        }
    };
    let text = report.render(c.format);
    match &c.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// TOML errors arrive with a source excerpt over several lines.
fn one_line(msg: &str) -> String {
    msg.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("fdchk: {}", one_line(&msg));
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("fdchk: numerical failure: {}", one_line(&msg));
            ExitCode::from(3)
        }
    }
}
