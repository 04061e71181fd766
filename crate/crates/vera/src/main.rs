//! Binary entry point: parse the command line and dispatch into the
//! library, mapping failures to categorized exit codes.

use clap::Parser;

fn main() {
    let cli = vera::cli::Cli::parse();
    if let Err(err) = vera::cli::run(cli) {
        eprintln!("error ({}): {err}", err.category());
        std::process::exit(err.exit_code());
    }
}
