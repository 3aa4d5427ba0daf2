use clap::Parser;

use mfsc_cli::{run, Cli};

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("{}", e.error_line());
        std::process::exit(e.exit_code());
    }
}
