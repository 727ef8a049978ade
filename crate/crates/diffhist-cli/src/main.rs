//! `diffhist`: synthesize sample batches, build hard and soft histograms,
//! benchmark every kernel against the exact count, certify gradients with
//! finite differences, verify the staged pipeline decomposition, and fit
//! generators to target histograms by gradient descent.
//!
//! Every subcommand accepts `--config file.json` with the same flat keys as
//! its flags; explicit flags win. The effective configuration is echoed
//! into each output so any artifact can be reproduced from itself.
//!
//! Exit codes: 0 on success, 1 on a usage or validation error, 2 when
//! `gradcheck` or `decompose-check` completes but a certified threshold
//! fails.

mod commands;
mod common;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use common::Outcome;

#[derive(Parser)]
#[command(
    name = "diffhist",
    version,
    about = "Differentiable histogram toolkit",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded sample batch and write one value per line.
    Synth(commands::synth::SynthArgs),
    /// Histogram a sample file with a soft kernel or the exact count.
    Hist(commands::hist::HistArgs),
    /// Score every soft kernel against the exact count on one batch.
    Compare(commands::compare::CompareArgs),
    /// Check analytic kernel gradients against central differences.
    Gradcheck(commands::gradcheck::GradcheckArgs),
    /// Check the staged tensor pipeline against the fused histogram.
    DecomposeCheck(commands::decompose::DecomposeArgs),
    /// Fit a generator so its soft histogram matches a target.
    Train(commands::train::TrainArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests arrive as "errors" but exit clean;
            // real usage errors carry the single-line diagnostic plus usage.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Hist(args) => commands::hist::run(args),
        Command::Compare(args) => commands::compare::run(args),
        Command::Gradcheck(args) => commands::gradcheck::run(args),
        Command::DecomposeCheck(args) => commands::decompose::run(args),
        Command::Train(args) => commands::train::run(args),
    };
    match outcome {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ThresholdExceeded) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
