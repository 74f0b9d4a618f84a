use clap::Parser;

use softarm::harness::cli::{run, Cli};

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Err(failure) = run(&cli) {
        eprintln!("{}", failure.to_json());
        std::process::exit(failure.status);
    }
    Ok(())
}
