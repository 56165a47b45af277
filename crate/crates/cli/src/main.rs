mod args;
mod error;
mod fit;
mod manifest;
mod report;
mod tools;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => fit::run(a),
        Command::Summarize(a) => tools::summarize(a),
        Command::Indices(a) => tools::indices(a),
        Command::Simulate(a) => tools::simulate(a),
        Command::Oracle(a) => tools::oracle(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
