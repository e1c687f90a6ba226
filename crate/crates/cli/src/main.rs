use std::io::Write;
use std::path::{Path, PathBuf};
use std::process;

use clap::{Args, Parser, Subcommand};
use idepca_cli::commands;
use idepca_cli::problem_file::{load_problem, Overrides, Problem};
use idepca_cli::{CliError, ExitCode};
use idepca_core::trajectory::DEFAULT_SAMPLES_PER_INTERVAL;

/// Oscillation analysis of impulsive equations with piecewise constant argument.
#[derive(Debug, Parser)]
#[command(name = "idepca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficient table n,a_n,b_n,alpha_n,q_n as CSV.
    Coeffs(Common),
    /// Criterion report and overall verdict as JSON.
    Analyze(Common),
    /// Reconstructed trajectory, node table and empirical verdicts.
    Simulate(Common),
    /// Pass/fail table of every consistency check that applies.
    Check(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Problem file (JSON).
    file: PathBuf,
    /// Output file; a directory for `simulate`. Defaults to stdout, or the
    /// current directory for `simulate`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Fraction of the sequence treated as its tail.
    #[arg(long)]
    tail: Option<f64>,
    /// Samples per unit interval of the reconstructed trajectory.
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_INTERVAL)]
    samples: usize,
    /// Overrides the horizon in the file.
    #[arg(long)]
    horizon: Option<i64>,
}

impl Common {
    fn problem(&self) -> Result<Problem, CliError> {
        if self.samples == 0 {
            return Err(CliError::input("--samples must be positive"));
        }
        load_problem(
            &self.file,
            Overrides {
                tol: self.tol,
                tail_fraction: self.tail,
                horizon: self.horizon,
            },
        )
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::io(format!("cannot write to stdout: {e}"))),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Coeffs(c) => {
            let body = commands::coeffs(&c.problem()?)?;
            emit(c.out.as_deref(), &body)?;
        }
        Command::Analyze(c) => {
            let body = commands::analyze_cmd(&c.problem()?)?;
            emit(c.out.as_deref(), &body)?;
        }
        Command::Simulate(c) => {
            let output = commands::simulate(&c.problem()?, c.samples)?;
            output.write_to(c.out.as_deref().unwrap_or(Path::new(".")))?;
        }
        Command::Check(c) => {
            let (table, passed) = commands::check(&c.problem()?, c.samples)?;
            emit(c.out.as_deref(), &table)?;
            if !passed {
                return Ok(ExitCode::InvariantFailure);
            }
        }
    }
    Ok(ExitCode::Success)
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    };
    process::exit(code as i32);
}
