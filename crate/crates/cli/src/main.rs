//! `signet`: ingest dialogue corpora, train the latent signed-network model,
//! evaluate, rank terms, export graphs and run synthetic experiments.

mod args;
mod commands;
mod error;
mod manifest;
mod tables;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let mut lines = text.lines();
            let first = lines.next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[E_USAGE]: {}", first);
            for l in lines.filter(|l| !l.trim().is_empty()) {
                eprintln!("{}", l);
            }
            return ExitCode::from(2);
        }
    };
    let argv: Vec<String> = std::env::args().collect();
    match commands::dispatch(&cli, &argv, true) {
        Ok(_) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error[{}]: {}", code, message);
            ExitCode::FAILURE
        }
    }
}
