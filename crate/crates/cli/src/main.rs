use std::process::ExitCode;

use clap::{Parser, Subcommand};
use superpartner::Error;

mod commands;
mod config;
mod report;

use config::{Format, RunArgs, RunConfig};
use report::Report;

#[derive(Parser)]
#[command(name = "superpartner", version, about = "Factorization and shape-invariance reports for catalog potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Riccati residuals of every shipped factorization.
    Verify(RunArgs),
    /// Samples of the one-parameter family of superpotentials.
    Family(RunArgs),
    /// Ladder energies against the finite-difference spectrum.
    Spectrum(RunArgs),
    /// Shape-invariance residuals and the family sweep.
    SiCheck(RunArgs),
    /// All factorizations derivable for the entry.
    Factorizations(RunArgs),
}

/// 2 for bad input, 1 for a numeric failure.
fn error_code(e: &Error) -> u8 {
    match e {
        Error::NotInvariant { .. }
        | Error::InsufficientData { .. }
        | Error::BisectionStalled { .. }
        | Error::PartnerIrregular { .. }
        | Error::NonNormalizableGround { .. }
        | Error::LengthMismatch { .. }
        | Error::GridMismatch
        | Error::MissingDerivative(_) => 1,
        _ => 2,
    }
}

fn run(command: Command) -> Result<u8, Error> {
    let (args, name) = match command {
        Command::Verify(a) => (a, "verify"),
        Command::Family(a) => (a, "family"),
        Command::Spectrum(a) => (a, "spectrum"),
        Command::SiCheck(a) => (a, "si-check"),
        Command::Factorizations(a) => (a, "factorizations"),
    };
    let config = RunConfig::from_args(args)?;
    let report: Report = match name {
        "verify" => commands::verify(&config)?,
        "family" => commands::family(&config)?,
        "spectrum" => commands::spectrum(&config)?,
        "si-check" => commands::si_check(&config)?,
        _ => commands::factorizations(&config)?,
    };
    let text = match config.format {
        Format::Json => report::render_json(&report.json),
        Format::Csv => {
            if name == "family" {
                for line in commands::family_nodes(&report) {
                    eprintln!("{line}");
                }
            }
            report.table.to_csv()
        }
    };
    match &config.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return Ok(2);
            }
        }
        None => print!("{text}"),
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
