use clap::Parser;
use legendre_lab::{run_cli, Cli};

fn main() {
    let cli = Cli::parse();
    std::process::exit(run_cli(&cli));
}
