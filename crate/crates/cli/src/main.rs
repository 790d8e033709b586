mod elicit;
mod failure;
mod fit;
mod manifest;
mod output;
mod report;
mod run;
mod simulate;
mod summarize;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::Failure;

/// Spatio-temporal product partition models for seasonal counts.
#[derive(Debug, Parser)]
#[command(name = "stppm", version, about, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its ground truth.
    Simulate(simulate::SimulateArgs),
    /// Run MCMC chains on a data directory.
    Fit(fit::FitArgs),
    /// Summarize a fitted run: point partitions, WAIC, dispersion flags.
    Summarize(summarize::SummarizeArgs),
    /// Prior mean and variance of the cluster count over a (υ, κ) grid.
    Elicit(elicit::ElicitArgs),
    /// Export plot-ready CSVs from a fitted run.
    ReportData(report::ReportArgs),
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(args, &argv),
        Command::Fit(args) => fit::run(args, &argv),
        Command::Summarize(args) => summarize::run(args, &argv),
        Command::Elicit(args) => elicit::run(args, &argv),
        Command::ReportData(args) => report::run(args, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
