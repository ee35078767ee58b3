//! `faberlab` command-line front end.
//!
//! Exit status: 0 success, 2 configuration error, 3 condition violation
//! under `--strict`, 4 numerical failure.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Knobs, Resolved};

#[derive(Parser)]
#[command(
    name = "faberlab",
    version,
    about = "Faber polynomials, weighted Riemann problems and double Faber expansions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a generalized Faber polynomial and write its coefficients.
    Gen(Knobs),
    /// Check weight admissibility, the A_p scan and curve regularity.
    Check(Knobs),
    /// Solve A F+ + B F- = f (or the homogeneous problem without --f).
    Solve(Knobs),
    /// Expand boundary data in the double Faber system.
    Expand(Knobs),
    /// Fit the residual decay of nested truncations.
    Study(Knobs),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Violation(Vec<String>),
    Numerical(String),
}

impl From<faberlab::Error> for CliError {
    fn from(e: faberlab::Error) -> Self {
        match e {
            faberlab::Error::Admissibility(v) => CliError::Violation(v),
            e if e.is_condition_violation() => CliError::Violation(vec![e.to_string()]),
            e if e.is_config() => CliError::Config(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FABERLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "FABERLAB_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let (name, knobs): (&'static str, Knobs) = match cli.command {
        Command::Gen(k) => ("gen", k),
        Command::Check(k) => ("check", k),
        Command::Solve(k) => ("solve", k),
        Command::Expand(k) => ("expand", k),
        Command::Study(k) => ("study", k),
    };
    let cfg = Resolved::new(name, knobs)?;
    let result = match cfg.command {
        "gen" => commands::gen(&cfg),
        "check" => commands::check(&cfg),
        "solve" => commands::solve(&cfg),
        "expand" => commands::expand(&cfg),
        _ => commands::study(&cfg),
    };
    if let Err(CliError::Violation(v)) = &result {
        let rep = output::report(
            cfg.report_header(),
            json!({ "status": "violation", "violations": v }),
        );
        output::write_json(&cfg.out, "violations.json", &rep)?;
        output::emit(&format!(
            "{}\n",
            serde_json::to_string(&rep).expect("report serializes")
        ));
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Violation(v)) => {
            for m in &v {
                eprintln!("violation: {m}");
            }
            ExitCode::from(3)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(4)
        }
    }
}
