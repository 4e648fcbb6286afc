//! `lineval` — evaluate OCR pipelines at the page and line level.

mod commands;
mod options;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use lineval_core::Error;

// Exit codes: 0 success, 1 usage/config error, 2 data validation error,
// 3 partial engine failures (report still written, returned by commands).
const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_DATA: i32 = 2;

#[derive(Parser)]
#[command(
    name = "lineval",
    version,
    about = "Page- and line-level OCR evaluation: CRR, flexible character accuracy,\n\
             reading-order strategies, synthetic line images, and engine benchmarking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate predictions (a directory, or engines run on the fly) against ground truth
    Eval(commands::eval::EvalArgs),
    /// Run external OCR engines over an image directory and save predictions + timings
    Run(commands::run::RunArgs),
    /// Generate distorted synthetic line images with a manifest
    Synth(commands::synth::SynthArgs),
    /// Corpus statistics: character frequency and words per line
    Stats(commands::stats::StatsArgs),
    /// Check a corpus directory against the annotation invariants
    Validate(commands::validate::ValidateArgs),
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let outcome = match cli.command {
        Command::Eval(args) => commands::eval::run(args),
        Command::Run(args) => commands::run::run(args),
        Command::Synth(args) => commands::synth::run(args),
        Command::Stats(args) => commands::stats::run(args),
        Command::Validate(args) => commands::validate::run(args),
    };

    std::process::exit(match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    });
}

fn exit_code_for(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::Parse { .. }
            | Error::Validation { .. }
            | Error::UnknownPage(_)
            | Error::MissingGeometry(_),
        ) => EXIT_DATA,
        _ => EXIT_USAGE,
    }
}
