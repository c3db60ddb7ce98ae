//! `pebms`: check, solve, reproduce and fuzz partial extended b-metric spaces.
//!
//! Exit codes: 0 success, 1 mathematical failure (axiom, precondition or
//! expectation), 2 usage or parse error, 3 non-convergence.

mod bound;
mod check;
mod envelope;
mod fuzz;
mod gallery;
mod input;
mod solve;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MATH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NO_CONVERGENCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "pebms",
    version,
    about = "Partial extended b-metric space toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a space against an axiom profile.
    Check(check::CheckArgs),
    /// Verify contraction preconditions and run Picard iteration.
    Solve(solve::SolveArgs),
    /// Reproduce every built-in worked example.
    Gallery(gallery::GalleryArgs),
    /// Generate, mutate and shrink random finite spaces.
    Fuzz(fuzz::FuzzArgs),
    /// Evaluate error bounds against a saved iteration trace.
    Bound(bound::BoundArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Output of a subcommand: what to print and the exit code.
pub struct Done {
    pub stdout: String,
    pub code: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => check::run(a),
        Command::Solve(a) => solve::run(a),
        Command::Gallery(a) => gallery::run(a),
        Command::Fuzz(a) => fuzz::run(a),
        Command::Bound(a) => bound::run(a),
    };
    match result {
        Ok(done) => {
            // A closed downstream pipe is not an error of ours.
            let mut out = std::io::stdout().lock();
            let _ = out
                .write_all(done.stdout.as_bytes())
                .and_then(|()| out.flush());
            ExitCode::from(done.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
