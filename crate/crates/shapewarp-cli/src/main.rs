use clap::Parser;
use shapewarp_cli::commands::{run, Command};

/// Category-level shape spaces, shape/pose inference and demonstration
/// transfer for partial point clouds.
#[derive(Parser)]
#[command(name = "shapewarp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli.command) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
