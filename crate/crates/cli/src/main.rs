//! `painleve`: command-line front end for the hierarchy library.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Hg(c) => commands::hg(c),
        Command::Linear(c) => commands::linear(c),
        Command::Integrate(a) => commands::integrate(&a),
        Command::Dynamics(c) => commands::dynamics(c),
        Command::Weyl(c) => commands::weyl(c),
        Command::Verify(c) => commands::verify(c),
        Command::Plot(c) => commands::plot(c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(255)
        }
    }
}
