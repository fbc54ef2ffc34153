//! `spectral-bench`: generate, split, fit, evaluate, and export spectral
//! classification pipelines from the command line.

mod commands;
mod config;

use clap::Parser;

#[derive(Parser)]
#[command(
    name = "spectral-bench",
    version,
    about = "Benchmark classifiers for high-dimensional spectral data",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: commands::Command,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = commands::run(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
