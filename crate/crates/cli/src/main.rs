mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{expand_config, Cli, Command};
use error::{CliError, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::GenKernel(a) => commands::gen_kernel(a),
        Command::Solve(a) => commands::solve(a),
        Command::AnalyzeRecords(a) => commands::analyze_records(a),
        Command::FitTail(a) => commands::fit_tail(a),
        Command::StoppingReport(a) => commands::stopping_report(a),
    }
}

fn main() -> ExitCode {
    let raw: Vec<String> = match std::env::args_os().map(|a| a.into_string()).collect() {
        Ok(v) => v,
        Err(_) => {
            eprintln!("error: arguments must be valid UTF-8");
            return ExitCode::from(1);
        }
    };
    let cli = match expand_config(raw).and_then(|args| {
        Cli::try_parse_from(args).map_err(|e| {
            if e.use_stderr() {
                CliError::config(e.to_string().trim_start_matches("error: ").trim_end().to_string())
            } else {
                let _ = e.print();
                std::process::exit(0);
            }
        })
    }) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{} {e}", cli.command.name());
            ExitCode::from(e.code() as u8)
        }
    }
}
